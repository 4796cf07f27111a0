#ifndef DLIVM_PROGRAM_HPP
#define DLIVM_PROGRAM_HPP

#include <memory>
#include <unordered_map>
#include <vector>

#include "dlivm/store.hpp"
#include "dlivm/stratify.hpp"

namespace dlivm {

inline constexpr std::uint32_t kUnboundSlot = std::numeric_limits<std::uint32_t>::max();

// Rule forms with variables renamed to dense per-rule slots.
struct CompiledArg {
    bool isVar;
    std::uint32_t slot;  // when isVar
    ConstId c;           // otherwise
};

struct CompiledAtom {
    PredId pred;
    std::vector<CompiledArg> args;
};

struct CompiledExprNode {
    ExprNode::Kind kind;
    std::int64_t value = 0;
    std::uint32_t slot = 0;
    int lhs = -1, rhs = -1;
};

struct CompiledBuiltin {
    std::uint32_t targetSlot;
    std::vector<CompiledExprNode> nodes;
    int root;
};

struct CompiledRule {
    std::uint32_t index;
    std::uint32_t stratum;
    bool recursive;
    std::uint32_t varCount = 0;
    std::vector<VarId> slotNames;  // slot -> variable name
    CompiledAtom head;
    std::vector<CompiledAtom> positive;
    std::vector<CompiledAtom> negative;
    std::vector<CompiledBuiltin> builtins;
};

// Program + stratification + compiled rules; immutable after analyze().
struct AnalyzedProgram {
    std::shared_ptr<Vocabulary> voc;
    Program program;
    Stratification strat;
    std::vector<CompiledRule> rules;

    std::uint32_t stratumOf(PredId p) const { return strat.stratumOf(p); }

    const CompiledRule& rule(std::uint32_t i) const { return rules[i]; }

    std::vector<const CompiledRule*> stratumRules(std::uint32_t s, bool recursive) const {
        std::vector<const CompiledRule*> out;
        if (s >= 1 && s <= strat.strataCount) {
            const auto& ids = recursive ? strat.strata[s - 1].recursive : strat.strata[s - 1].nonrecursive;
            for (std::uint32_t i : ids)
                out.push_back(&rules[i]);
        }
        return out;
    }
};

namespace detail {

inline CompiledAtom compileAtom(const Atom& a, std::unordered_map<VarId, std::uint32_t>& slots,
                                std::vector<VarId>& names) {
    CompiledAtom out;
    out.pred = a.pred;
    for (const Term& t : a.args) {
        if (t.isVar()) {
            auto [it, inserted] = slots.emplace(t.id, static_cast<std::uint32_t>(names.size()));
            if (inserted)
                names.push_back(t.id);
            out.args.push_back({true, it->second, 0});
        } else {
            out.args.push_back({false, 0, t.id});
        }
    }
    return out;
}

}  // namespace detail

inline std::shared_ptr<const AnalyzedProgram> analyze(std::shared_ptr<Vocabulary> voc, Program program) {
    auto out = std::make_shared<AnalyzedProgram>();
    out->voc = std::move(voc);
    out->strat = stratify(*out->voc, program);
    out->program = std::move(program);
    for (std::size_t i = 0; i < out->program.rules.size(); ++i) {
        const Rule& r = out->program.rules[i];
        CompiledRule cr;
        cr.index = static_cast<std::uint32_t>(i);
        cr.stratum = out->strat.ruleStratum[i];
        cr.recursive = out->strat.ruleRecursive[i];
        std::unordered_map<VarId, std::uint32_t> slots;
        for (const Atom& a : r.positiveBody)
            cr.positive.push_back(detail::compileAtom(a, slots, cr.slotNames));
        cr.head = detail::compileAtom(r.head, slots, cr.slotNames);
        for (const Atom& a : r.negativeBody)
            cr.negative.push_back(detail::compileAtom(a, slots, cr.slotNames));
        for (const Builtin& b : r.builtins) {
            CompiledBuiltin cb;
            for (const ExprNode& n : b.nodes) {
                CompiledExprNode cn;
                cn.kind = n.kind;
                cn.value = n.value;
                cn.lhs = n.lhs;
                cn.rhs = n.rhs;
                if (n.kind == ExprNode::Kind::Var) {
                    auto [it, inserted] = slots.emplace(n.var, static_cast<std::uint32_t>(cr.slotNames.size()));
                    if (inserted)
                        cr.slotNames.push_back(n.var);
                    cn.slot = it->second;
                }
                cb.nodes.push_back(cn);
            }
            cb.root = b.root;
            auto [it, inserted] = slots.emplace(b.target, static_cast<std::uint32_t>(cr.slotNames.size()));
            if (inserted)
                cr.slotNames.push_back(b.target);
            cb.targetSlot = it->second;
            cr.builtins.push_back(std::move(cb));
        }
        cr.varCount = static_cast<std::uint32_t>(cr.slotNames.size());
        out->rules.push_back(std::move(cr));
    }
    return out;
}

}  // namespace dlivm

#endif
