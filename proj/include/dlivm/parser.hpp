#ifndef DLIVM_PARSER_HPP
#define DLIVM_PARSER_HPP

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dlivm/model.hpp"
#include "dlivm/stratify.hpp"

namespace dlivm {

// A ground fact, resolved against a Vocabulary.
struct GroundFact {
    PredId pred;
    std::vector<ConstId> args;

    friend bool operator==(const GroundFact&, const GroundFact&) = default;
};

struct GroundFactHash {
    std::size_t operator()(const GroundFact& f) const {
        std::size_t h = std::hash<std::uint32_t>()(f.pred);
        for (ConstId c : f.args)
            h = h * 1000003u ^ c;
        return h;
    }
};

// Parsed update: explicit deletions (E-) and insertions (E+).
struct ParsedDelta {
    std::vector<GroundFact> deletions;
    std::vector<GroundFact> insertions;
};

namespace detail {

class Lexer {
public:
    enum class Tok { Ident, Variable, Int, String, LParen, RParen, Comma, Dot, ColonDash, Eq, Plus, Minus, Star, Not, End };

    Lexer(std::string_view text) : text_(text) { advance(); }

    Tok tok() const { return tok_; }
    const std::string& text() const { return tokText_; }
    std::int64_t intValue() const { return intValue_; }
    int line() const { return tokLine_; }
    int column() const { return tokCol_; }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, tokLine_, tokCol_); }

    void expect(Tok t, const char* what) {
        if (tok_ != t)
            fail(std::string("expected ") + what);
        advance();
    }

    void advance() {
        skipWs();
        tokLine_ = line_;
        tokCol_ = col_;
        tokText_.clear();
        if (pos_ >= text_.size()) {
            tok_ = Tok::End;
            return;
        }
        char c = text_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                tokText_ += take();
            if (tokText_ == "not")
                tok_ = Tok::Not;
            else
                tok_ = std::isupper(static_cast<unsigned char>(tokText_[0])) ? Tok::Variable : Tok::Ident;
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            lexInt(false);
            return;
        }
        switch (c) {
            case '(': take(); tok_ = Tok::LParen; return;
            case ')': take(); tok_ = Tok::RParen; return;
            case ',': take(); tok_ = Tok::Comma; return;
            case '.': take(); tok_ = Tok::Dot; return;
            case '=': take(); tok_ = Tok::Eq; return;
            case '+': take(); tok_ = Tok::Plus; return;
            case '*': take(); tok_ = Tok::Star; return;
            case '"': lexString(); return;
            case ':':
                take();
                if (pos_ < text_.size() && text_[pos_] == '-') {
                    take();
                    tok_ = Tok::ColonDash;
                    return;
                }
                throw ParseError("expected ':-'", tokLine_, tokCol_);
            case '-':
                take();
                if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                    lexInt(true);
                    return;
                }
                tok_ = Tok::Minus;
                return;
            default:
                throw ParseError(std::string("unexpected character '") + c + "'", tokLine_, tokCol_);
        }
    }

private:
    char take() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skipWs() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '%') {
                while (pos_ < text_.size() && text_[pos_] != '\n')
                    take();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                take();
            } else {
                break;
            }
        }
    }

    void lexInt(bool negative) {
        std::string digits;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
            digits += take();
        try {
            intValue_ = std::stoll((negative ? "-" : "") + digits);
        } catch (const std::out_of_range&) {
            throw ParseError("integer literal out of range", tokLine_, tokCol_);
        }
        tok_ = Tok::Int;
    }

    void lexString() {
        take();  // opening quote
        while (pos_ < text_.size() && text_[pos_] != '"') {
            char c = take();
            if (c == '\\' && pos_ < text_.size())
                c = take();
            tokText_ += c;
        }
        if (pos_ >= text_.size())
            throw ParseError("unterminated string literal", tokLine_, tokCol_);
        take();  // closing quote
        tok_ = Tok::String;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Tok tok_ = Tok::End;
    std::string tokText_;
    std::int64_t intValue_ = 0;
    int tokLine_ = 1, tokCol_ = 1;
};

class Parser {
public:
    Parser(Vocabulary& voc, std::string_view text) : voc_(voc), lex_(text) {}

    Program parseProgram() {
        Program program;
        while (lex_.tok() != Lexer::Tok::End)
            program.rules.push_back(parseRule());
        return program;
    }

    std::vector<GroundFact> parseFacts() {
        std::vector<GroundFact> out;
        while (lex_.tok() != Lexer::Tok::End) {
            out.push_back(parseGroundFact());
            lex_.expect(Lexer::Tok::Dot, "'.'");
        }
        return out;
    }

    ParsedDelta parseDelta() {
        ParsedDelta delta;
        while (lex_.tok() != Lexer::Tok::End) {
            bool deletion;
            if (lex_.tok() == Lexer::Tok::Minus) {
                deletion = true;
            } else if (lex_.tok() == Lexer::Tok::Plus) {
                deletion = false;
            } else {
                lex_.fail("expected '+' or '-' line prefix");
            }
            lex_.advance();
            (deletion ? delta.deletions : delta.insertions).push_back(parseGroundFact());
            lex_.expect(Lexer::Tok::Dot, "'.'");
        }
        return delta;
    }

private:
    Rule parseRule() {
        Rule rule;
        rule.sourceLine = lex_.line();
        rule.head = parseAtom();
        if (lex_.tok() == Lexer::Tok::ColonDash) {
            lex_.advance();
            for (;;) {
                parseBodyItem(rule);
                if (lex_.tok() != Lexer::Tok::Comma)
                    break;
                lex_.advance();
            }
        }
        lex_.expect(Lexer::Tok::Dot, "'.'");
        return rule;
    }

    void parseBodyItem(Rule& rule) {
        if (lex_.tok() == Lexer::Tok::Not) {
            lex_.advance();
            rule.negativeBody.push_back(parseAtom());
            return;
        }
        // A name here starts either an atom (name followed by '(') or a
        // built-in assignment (variable followed by '='); disambiguate after
        // consuming the name.
        if (lex_.tok() != Lexer::Tok::Ident && lex_.tok() != Lexer::Tok::Variable)
            lex_.fail("expected atom, negated atom, or built-in");
        bool isVariable = lex_.tok() == Lexer::Tok::Variable;
        std::string name = lex_.text();
        int line = lex_.line(), col = lex_.column();
        lex_.advance();
        if (lex_.tok() == Lexer::Tok::Eq) {
            if (!isVariable)
                throw ParseError("built-in target must be a variable", line, col);
            Builtin b;
            b.target = voc_.var(name);
            lex_.advance();
            b.root = parseExpr(b);
            rule.builtins.push_back(std::move(b));
        } else {
            rule.positiveBody.push_back(parseAtomArgs(name, line, col));
        }
    }

    // expr := factor (('+'|'-') factor)* ; factor := primary ('*' primary)*
    int parseExpr(Builtin& b) {
        int lhs = parseFactor(b);
        while (lex_.tok() == Lexer::Tok::Plus || lex_.tok() == Lexer::Tok::Minus) {
            auto kind = lex_.tok() == Lexer::Tok::Plus ? ExprNode::Kind::Add : ExprNode::Kind::Sub;
            lex_.advance();
            int rhs = parseFactor(b);
            ExprNode node;
            node.kind = kind;
            node.lhs = lhs;
            node.rhs = rhs;
            b.nodes.push_back(node);
            lhs = static_cast<int>(b.nodes.size()) - 1;
        }
        return lhs;
    }

    int parseFactor(Builtin& b) {
        int lhs = parsePrimary(b);
        while (lex_.tok() == Lexer::Tok::Star) {
            lex_.advance();
            int rhs = parsePrimary(b);
            ExprNode node;
            node.kind = ExprNode::Kind::Mul;
            node.lhs = lhs;
            node.rhs = rhs;
            b.nodes.push_back(node);
            lhs = static_cast<int>(b.nodes.size()) - 1;
        }
        return lhs;
    }

    int parsePrimary(Builtin& b) {
        ExprNode node;
        if (lex_.tok() == Lexer::Tok::Int) {
            node.kind = ExprNode::Kind::Int;
            node.value = lex_.intValue();
        } else if (lex_.tok() == Lexer::Tok::Variable) {
            node.kind = ExprNode::Kind::Var;
            node.var = voc_.var(lex_.text());
        } else if (lex_.tok() == Lexer::Tok::LParen) {
            lex_.advance();
            int inner = parseExpr(b);
            lex_.expect(Lexer::Tok::RParen, "')'");
            return inner;
        } else {
            lex_.fail("expected integer, variable, or '(' in arithmetic expression");
        }
        lex_.advance();
        b.nodes.push_back(node);
        return static_cast<int>(b.nodes.size()) - 1;
    }

    Atom parseAtom() {
        // Predicates are recognised positionally (a name followed by '('), so
        // uppercase-initial predicate names are fine.
        if (lex_.tok() != Lexer::Tok::Ident && lex_.tok() != Lexer::Tok::Variable)
            lex_.fail("expected predicate name");
        std::string name = lex_.text();
        int line = lex_.line(), col = lex_.column();
        lex_.advance();
        return parseAtomArgs(name, line, col);
    }

    Atom parseAtomArgs(const std::string& name, int line, int col) {
        lex_.expect(Lexer::Tok::LParen, "'('");
        Atom atom;
        std::vector<Term> args;
        if (lex_.tok() != Lexer::Tok::RParen) {
            for (;;) {
                args.push_back(parseTerm());
                if (lex_.tok() != Lexer::Tok::Comma)
                    break;
                lex_.advance();
            }
        }
        lex_.expect(Lexer::Tok::RParen, "')'");
        try {
            atom.pred = voc_.pred(name, args.size());
        } catch (const ArityError& e) {
            throw ParseError(e.what(), line, col);
        }
        atom.args = std::move(args);
        return atom;
    }

    Term parseTerm() {
        Term t{};
        switch (lex_.tok()) {
            case Lexer::Tok::Variable: t = Term::variable(voc_.var(lex_.text())); break;
            case Lexer::Tok::Ident: t = Term::constant(voc_.symbolConst(lex_.text())); break;
            case Lexer::Tok::Int: t = Term::constant(voc_.intConst(lex_.intValue())); break;
            case Lexer::Tok::String: t = Term::constant(voc_.stringConst(lex_.text())); break;
            default: lex_.fail("expected term");
        }
        lex_.advance();
        return t;
    }

    GroundFact parseGroundFact() {
        Atom atom = parseAtom();
        GroundFact fact;
        fact.pred = atom.pred;
        for (const Term& t : atom.args) {
            if (t.isVar())
                throw GroundnessError(renderAtom(voc_, atom));
            fact.args.push_back(t.id);
        }
        return fact;
    }

    Vocabulary& voc_;
    Lexer lex_;
};

}  // namespace detail

// Parses a .dl program; safety and stratifiability are checked before return.
inline Program parseProgram(Vocabulary& voc, std::string_view text) {
    Program program = detail::Parser(voc, text).parseProgram();
    stratify(voc, program);  // validates; result recomputed cheaply by callers
    return program;
}

inline std::vector<GroundFact> parseFacts(Vocabulary& voc, std::string_view text) {
    return detail::Parser(voc, text).parseFacts();
}

inline ParsedDelta parseDelta(Vocabulary& voc, std::string_view text) {
    return detail::Parser(voc, text).parseDelta();
}

inline std::string renderFact(const Vocabulary& voc, const GroundFact& f) {
    std::string out = voc.predName(f.pred) + "(";
    for (std::size_t i = 0; i < f.args.size(); ++i) {
        if (i)
            out += ',';
        out += voc.renderConst(f.args[i]);
    }
    return out + ").";
}

inline std::string renderProgram(const Vocabulary& voc, const Program& program) {
    std::string out;
    for (const Rule& r : program.rules) {
        out += renderRule(voc, r);
        out += '\n';
    }
    return out;
}

}  // namespace dlivm

#endif
