// Brute-force reference implementation used as a test oracle. Deliberately
// shares no evaluation machinery with the engine: linear scans, no indexes,
// textual join order, naive (non-semi-naive) fixpoints, and its own stratum
// assignment.
#ifndef DLIVM_TESTS_NAIVE_ORACLE_HPP
#define DLIVM_TESTS_NAIVE_ORACLE_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dlivm/model.hpp"
#include "dlivm/parser.hpp"

namespace oracle {

using dlivm::Atom;
using dlivm::ConstId;
using dlivm::GroundFact;
using dlivm::GroundFactHash;
using dlivm::Program;
using dlivm::Rule;
using dlivm::VarId;
using dlivm::Vocabulary;

using FactBag = std::unordered_set<GroundFact, GroundFactHash>;
using Bindings = std::unordered_map<VarId, ConstId>;

// Stratum per predicate by iterated maximisation: head at least as high as
// positive body predicates and strictly above negative ones.
inline std::vector<std::uint32_t> naiveStrata(const Vocabulary& voc, const Program& prog) {
    std::vector<std::uint32_t> lambda(voc.predCount(), 1);
    bool changed = true;
    std::size_t guard = 0;
    while (changed && guard++ < voc.predCount() * prog.rules.size() + 1) {
        changed = false;
        for (const Rule& r : prog.rules) {
            std::uint32_t need = 1;
            for (const Atom& a : r.positiveBody)
                need = std::max(need, lambda[a.pred]);
            for (const Atom& a : r.negativeBody)
                need = std::max(need, lambda[a.pred] + 1);
            if (lambda[r.head.pred] < need) {
                lambda[r.head.pred] = need;
                changed = true;
            }
        }
    }
    return lambda;
}

inline std::int64_t evalExpr(const Vocabulary& voc, const dlivm::Builtin& b, int node,
                             const Bindings& env, bool& ok) {
    const dlivm::ExprNode& n = b.nodes[node];
    switch (n.kind) {
        case dlivm::ExprNode::Kind::Int:
            return n.value;
        case dlivm::ExprNode::Kind::Var: {
            const dlivm::ConstInfo& c = voc.constInfo(env.at(n.var));
            if (c.kind != dlivm::ConstKind::Int) {
                ok = false;
                return 0;
            }
            return c.value;
        }
        case dlivm::ExprNode::Kind::Add:
            return evalExpr(voc, b, n.lhs, env, ok) + evalExpr(voc, b, n.rhs, env, ok);
        case dlivm::ExprNode::Kind::Sub:
            return evalExpr(voc, b, n.lhs, env, ok) - evalExpr(voc, b, n.rhs, env, ok);
        case dlivm::ExprNode::Kind::Mul:
            return evalExpr(voc, b, n.lhs, env, ok) * evalExpr(voc, b, n.rhs, env, ok);
    }
    return 0;
}

inline GroundFact groundOf(const Atom& a, const Bindings& env) {
    GroundFact f;
    f.pred = a.pred;
    for (const dlivm::Term& t : a.args)
        f.args.push_back(t.isVar() ? env.at(t.id) : t.id);
    return f;
}

// Enumerates every instance of the rule over I: positive atoms left-to-right
// by scanning all facts, then built-ins in textual order, then negations.
inline void forEachRuleInstance(Vocabulary& voc, const Rule& rule, const FactBag& I,
                                const std::function<void(const Bindings&)>& cb) {
    std::function<void(std::size_t, Bindings)> step = [&](std::size_t i, Bindings env) {
        if (i < rule.positiveBody.size()) {
            const Atom& a = rule.positiveBody[i];
            for (const GroundFact& f : I) {
                if (f.pred != a.pred)
                    continue;
                Bindings next = env;
                bool ok = true;
                for (std::size_t p = 0; p < a.args.size() && ok; ++p) {
                    const dlivm::Term& t = a.args[p];
                    if (!t.isVar()) {
                        ok = t.id == f.args[p];
                    } else {
                        auto [it, inserted] = next.emplace(t.id, f.args[p]);
                        ok = inserted || it->second == f.args[p];
                    }
                }
                if (ok)
                    step(i + 1, std::move(next));
            }
            return;
        }
        for (const dlivm::Builtin& b : rule.builtins) {
            bool ok = true;
            std::int64_t v = evalExpr(voc, b, b.root, env, ok);
            if (!ok)
                return;
            ConstId c = voc.intConst(v);
            auto [it, inserted] = env.emplace(b.target, c);
            if (!inserted && it->second != c)
                return;
        }
        for (const Atom& a : rule.negativeBody)
            if (I.count(groundOf(a, env)))
                return;
        cb(env);
    };
    step(0, Bindings{});
}

// Stratified naive fixpoint materialisation.
inline FactBag naiveMat(Vocabulary& voc, const Program& prog, const std::vector<GroundFact>& E) {
    FactBag I(E.begin(), E.end());
    std::vector<std::uint32_t> lambda = naiveStrata(voc, prog);
    std::uint32_t maxStratum = 1;
    for (std::uint32_t l : lambda)
        maxStratum = std::max(maxStratum, l);
    for (std::uint32_t s = 1; s <= maxStratum; ++s) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (const Rule& r : prog.rules) {
                if (lambda[r.head.pred] != s)
                    continue;
                std::vector<GroundFact> derived;
                forEachRuleInstance(voc, r, I,
                                    [&](const Bindings& env) { derived.push_back(groundOf(r.head, env)); });
                for (GroundFact& f : derived)
                    if (I.insert(std::move(f)).second)
                        changed = true;
            }
        }
    }
    return I;
}

// Canonical instance key: rule index plus sorted (variable, constant) pairs.
using InstanceKey = std::pair<std::size_t, std::vector<std::pair<VarId, ConstId>>>;
using InstanceBag = std::map<InstanceKey, std::uint64_t>;

inline InstanceKey keyOf(std::size_t ruleIdx, const Bindings& env) {
    std::vector<std::pair<VarId, ConstId>> pairs(env.begin(), env.end());
    std::sort(pairs.begin(), pairs.end());
    return {ruleIdx, std::move(pairs)};
}

// Every firing instance of every rule over a fixed fact set, as a multiset.
inline InstanceBag allInstances(Vocabulary& voc, const Program& prog, const FactBag& I) {
    InstanceBag bag;
    for (std::size_t i = 0; i < prog.rules.size(); ++i)
        forEachRuleInstance(voc, prog.rules[i], I,
                            [&](const Bindings& env) { ++bag[keyOf(i, env)]; });
    return bag;
}

}  // namespace oracle

#endif
