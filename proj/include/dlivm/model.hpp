#ifndef DLIVM_MODEL_HPP
#define DLIVM_MODEL_HPP

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "dlivm/errors.hpp"
#include "dlivm/vocabulary.hpp"

namespace dlivm {

struct Term {
    enum class Kind : std::uint8_t { Variable, Constant };
    Kind kind;
    std::uint32_t id;  // VarId or ConstId

    static Term variable(VarId v) { return {Kind::Variable, v}; }
    static Term constant(ConstId c) { return {Kind::Constant, c}; }
    bool isVar() const { return kind == Kind::Variable; }

    friend bool operator==(const Term&, const Term&) = default;
};

struct Atom {
    PredId pred;
    std::vector<Term> args;

    friend bool operator==(const Atom&, const Atom&) = default;
};

// Arithmetic expression over integer constants and variables; nodes are stored
// flat so rules stay copyable.
struct ExprNode {
    enum class Kind : std::uint8_t { Int, Var, Add, Sub, Mul };
    Kind kind;
    std::int64_t value = 0;  // Int
    VarId var = 0;           // Var
    int lhs = -1;
    int rhs = -1;
};

struct Builtin {
    VarId target;
    std::vector<ExprNode> nodes;
    int root = -1;

    void collectVars(std::vector<VarId>& out) const {
        for (const ExprNode& n : nodes)
            if (n.kind == ExprNode::Kind::Var)
                out.push_back(n.var);
    }
};

struct Rule {
    Atom head;
    std::vector<Atom> positiveBody;
    std::vector<Atom> negativeBody;
    std::vector<Builtin> builtins;
    int sourceLine = 0;
};

struct Program {
    std::vector<Rule> rules;
};

inline std::string renderTerm(const Vocabulary& voc, const Term& t) {
    return t.isVar() ? voc.varName(t.id) : voc.renderConst(t.id);
}

inline std::string renderAtom(const Vocabulary& voc, const Atom& a) {
    std::string out = voc.predName(a.pred) + "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i)
            out += ',';
        out += renderTerm(voc, a.args[i]);
    }
    return out + ")";
}

inline std::string renderExpr(const Vocabulary& voc, const Builtin& b, int node) {
    const ExprNode& n = b.nodes[node];
    // Additive subexpressions need parentheses under a product.
    auto factor = [&](int child) {
        const ExprNode& c = b.nodes[child];
        std::string s = renderExpr(voc, b, child);
        if (c.kind == ExprNode::Kind::Add || c.kind == ExprNode::Kind::Sub)
            return "(" + s + ")";
        return s;
    };
    switch (n.kind) {
        case ExprNode::Kind::Int: return std::to_string(n.value);
        case ExprNode::Kind::Var: return voc.varName(n.var);
        case ExprNode::Kind::Add:
            return renderExpr(voc, b, n.lhs) + " + " + renderExpr(voc, b, n.rhs);
        case ExprNode::Kind::Sub:
            // Subtraction is left-associative, so an additive right operand
            // needs parentheses as well.
            return renderExpr(voc, b, n.lhs) + " - " + factor(n.rhs);
        case ExprNode::Kind::Mul:
            return factor(n.lhs) + " * " + factor(n.rhs);
    }
    return {};
}

inline std::string renderRule(const Vocabulary& voc, const Rule& r) {
    std::string out = renderAtom(voc, r.head);
    bool first = true;
    auto sep = [&] {
        out += first ? " :- " : ", ";
        first = false;
    };
    for (const Atom& a : r.positiveBody) {
        sep();
        out += renderAtom(voc, a);
    }
    for (const Atom& a : r.negativeBody) {
        sep();
        out += "not " + renderAtom(voc, a);
    }
    for (const Builtin& b : r.builtins) {
        sep();
        out += voc.varName(b.target) + " = " + renderExpr(voc, b, b.root);
    }
    return out + ".";
}

// Safety: every variable must occur in a positive body atom, except built-in
// targets, which may instead be bound by the expression chain of earlier
// built-ins. Throws SafetyError naming the first offending variable.
inline void checkSafety(const Vocabulary& voc, const Rule& r) {
    std::unordered_set<VarId> bound;
    for (const Atom& a : r.positiveBody)
        for (const Term& t : a.args)
            if (t.isVar())
                bound.insert(t.id);
    auto require = [&](VarId v) {
        if (!bound.count(v))
            throw SafetyError(voc.varName(v), renderRule(voc, r));
    };
    for (const Builtin& b : r.builtins) {
        std::vector<VarId> vars;
        b.collectVars(vars);
        for (VarId v : vars)
            require(v);
        bound.insert(b.target);  // bound from here on
    }
    for (const Term& t : r.head.args)
        if (t.isVar())
            require(t.id);
    for (const Atom& a : r.negativeBody)
        for (const Term& t : a.args)
            if (t.isVar())
                require(t.id);
}

}  // namespace dlivm

#endif
