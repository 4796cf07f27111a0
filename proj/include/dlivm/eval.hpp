#ifndef DLIVM_EVAL_HPP
#define DLIVM_EVAL_HPP

#include <cassert>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dlivm/program.hpp"

namespace dlivm {

// One engine: program, explicit facts E, materialisation I, derivation counters.
struct EngineState {
    std::shared_ptr<const AnalyzedProgram> program;
    FactRegistry registry;
    FactSet explicitFacts;  // E
    FactSet facts;          // I
    CounterMap counters;
    CounterMode counterMode = CounterMode::Both;

    Vocabulary& voc() const { return *program->voc; }

    std::uint32_t stratumOfFact(FactId f) const {
        return program->stratumOf(registry.fact(f).pred);
    }
};

struct EvalStats {
    std::uint64_t instancesFired = 0;
    std::uint64_t candidates = 0;
};

struct EvalContext {
    const AnalyzedProgram* prog;
    FactRegistry* reg;
    EvalStats* stats = nullptr;

    void candidate() {
        if (stats)
            ++stats->candidates;
    }
    void fired() {
        if (stats)
            ++stats->instancesFired;
    }
};

// Ordered iteration + membership over a delta set (P or N of Eq.-style
// delta-restricted matching). forEach stops early when the callback returns
// false.
struct DeltaSet {
    std::function<void(const std::function<bool(FactId)>&)> forEach;
    std::function<bool(FactId)> contains;
};

inline DeltaSet deltaOf(const FactIdSet& s) {
    return {[&s](const std::function<bool(FactId)>& cb) {
                for (FactId f : s.order())
                    if (!cb(f))
                        return;
            },
            [&s](FactId f) { return s.contains(f); }};
}

// base \ minus, e.g. D \ A.
inline DeltaSet deltaDiff(const FactSet& base, const FactSet& minus) {
    return {[&base, &minus](const std::function<bool(FactId)>& cb) {
                bool go = true;
                base.forEachLive([&](FactId f) {
                    if (go && !minus.contains(f))
                        go = cb(f);
                });
            },
            [&base, &minus](FactId f) { return base.contains(f) && !minus.contains(f); }};
}

// ---------------------------------------------------------------------------
// Body evaluation plans

struct PlanStep {
    enum class Kind : std::uint8_t { Pivot, NegPivot, Positive, Negative, Builtin };
    Kind kind;
    int idx;
    bool excludeDelta = false;  // Positive: skip facts in P; Negative: grounding must miss N
};

using Plan = std::vector<PlanStep>;

namespace detail {

inline std::size_t boundVarCount(const CompiledAtom& a, const std::vector<bool>& bound) {
    std::size_t n = 0;
    for (const CompiledArg& arg : a.args)
        if (arg.isVar && bound[arg.slot])
            ++n;
    return n;
}

// Coarse selectivity: predicate cardinality over the product of distinct key
// counts of the bound positions. Atoms over the same predicate with the same
// bound positions tie, which keeps backward plans honest about their cost.
inline double estimateMatches(const FactView& pos, const CompiledAtom& a, const std::vector<bool>& bound) {
    double total = 0;
    if (pos.enum1)
        total += static_cast<double>(pos.enum1->predFactCount(a.pred));
    if (pos.enum2)
        total += static_cast<double>(pos.enum2->predFactCount(a.pred));
    bool anyKnown = false, allKnown = true;
    double sel = total;
    for (std::size_t p = 0; p < a.args.size(); ++p) {
        const CompiledArg& arg = a.args[p];
        bool known = !arg.isVar || bound[arg.slot];
        if (!known) {
            allKnown = false;
            continue;
        }
        anyKnown = true;
        std::size_t dk = 0;
        if (pos.enum1)
            dk += pos.enum1->distinctKeys(a.pred, p);
        if (pos.enum2)
            dk += pos.enum2->distinctKeys(a.pred, p);
        sel /= static_cast<double>(dk ? dk : 1);
    }
    if (allKnown && !a.args.empty())
        return 1.0;
    if (!anyKnown)
        return total;
    return sel;
}

}  // namespace detail

enum class PivotKind : std::uint8_t { None, Positive, Negative };

// Greedy join order: repeatedly place the positive atom with the most bound
// variables (ties: lowest estimated match count, then body order); built-ins
// go in as soon as their expression variables are bound, negative atoms once
// fully bound. An optional delta pivot is forced first.
inline Plan planBody(const CompiledRule& rule, const FactView& pos, std::vector<bool> bound,
                     PivotKind pivotKind = PivotKind::None, int pivotIdx = -1) {
    Plan plan;
    std::vector<bool> placedPos(rule.positive.size(), false);
    std::vector<bool> placedNeg(rule.negative.size(), false);
    std::vector<bool> placedBlt(rule.builtins.size(), false);

    auto bindAtom = [&](const CompiledAtom& a) {
        for (const CompiledArg& arg : a.args)
            if (arg.isVar)
                bound[arg.slot] = true;
    };

    if (pivotKind == PivotKind::Positive) {
        plan.push_back({PlanStep::Kind::Pivot, pivotIdx, false});
        placedPos[pivotIdx] = true;
        bindAtom(rule.positive[pivotIdx]);
    } else if (pivotKind == PivotKind::Negative) {
        plan.push_back({PlanStep::Kind::NegPivot, pivotIdx, false});
        placedNeg[pivotIdx] = true;
        bindAtom(rule.negative[pivotIdx]);
    }

    auto flush = [&] {
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t b = 0; b < rule.builtins.size(); ++b) {
                if (placedBlt[b])
                    continue;
                bool ready = true;
                for (const CompiledExprNode& n : rule.builtins[b].nodes)
                    if (n.kind == ExprNode::Kind::Var && !bound[n.slot])
                        ready = false;
                if (ready) {
                    plan.push_back({PlanStep::Kind::Builtin, static_cast<int>(b), false});
                    placedBlt[b] = true;
                    bound[rule.builtins[b].targetSlot] = true;
                    changed = true;
                }
            }
            for (std::size_t n = 0; n < rule.negative.size(); ++n) {
                if (placedNeg[n])
                    continue;
                bool ready = true;
                for (const CompiledArg& arg : rule.negative[n].args)
                    if (arg.isVar && !bound[arg.slot])
                        ready = false;
                if (ready) {
                    bool excl = pivotKind == PivotKind::Negative && static_cast<int>(n) < pivotIdx;
                    plan.push_back({PlanStep::Kind::Negative, static_cast<int>(n), excl});
                    placedNeg[n] = true;
                    changed = true;
                }
            }
        }
    };

    flush();
    for (;;) {
        int best = -1;
        std::size_t bestBound = 0;
        double bestEst = 0;
        for (std::size_t i = 0; i < rule.positive.size(); ++i) {
            if (placedPos[i])
                continue;
            std::size_t bv = detail::boundVarCount(rule.positive[i], bound);
            double est = detail::estimateMatches(pos, rule.positive[i], bound);
            if (best < 0 || bv > bestBound || (bv == bestBound && est < bestEst)) {
                best = static_cast<int>(i);
                bestBound = bv;
                bestEst = est;
            }
        }
        if (best < 0)
            break;
        bool excl = (pivotKind == PivotKind::Positive && best < pivotIdx) || pivotKind == PivotKind::Negative;
        plan.push_back({PlanStep::Kind::Positive, best, excl});
        placedPos[best] = true;
        bindAtom(rule.positive[best]);
        flush();
    }
    for (std::size_t b = 0; b < rule.builtins.size(); ++b)
        if (!placedBlt[b])
            throw UnboundBuiltinError("rule " + std::to_string(rule.index));
    return plan;
}

// ---------------------------------------------------------------------------
// Instance enumeration

namespace detail {

inline bool unifyFact(const CompiledAtom& atom, const GroundFact& f, std::vector<ConstId>& bindings,
                      std::vector<std::uint32_t>& trail) {
    std::size_t start = trail.size();
    for (std::size_t p = 0; p < atom.args.size(); ++p) {
        const CompiledArg& arg = atom.args[p];
        ConstId v = f.args[p];
        if (!arg.isVar) {
            if (arg.c == v)
                continue;
        } else if (bindings[arg.slot] == kUnboundSlot) {
            bindings[arg.slot] = v;
            trail.push_back(arg.slot);
            continue;
        } else if (bindings[arg.slot] == v) {
            continue;
        }
        while (trail.size() > start) {
            bindings[trail.back()] = kUnboundSlot;
            trail.pop_back();
        }
        return false;
    }
    return true;
}

inline std::optional<GroundFact> groundAtom(const CompiledAtom& atom, const std::vector<ConstId>& bindings) {
    GroundFact f;
    f.pred = atom.pred;
    f.args.reserve(atom.args.size());
    for (const CompiledArg& arg : atom.args) {
        ConstId v = arg.isVar ? bindings[arg.slot] : arg.c;
        if (v == kUnboundSlot)
            return std::nullopt;
        f.args.push_back(v);
    }
    return f;
}

inline std::int64_t evalExprNode(const CompiledBuiltin& b, int node, const std::vector<ConstId>& bindings,
                                 const Vocabulary& voc, bool& ok) {
    const CompiledExprNode& n = b.nodes[node];
    switch (n.kind) {
        case ExprNode::Kind::Int:
            return n.value;
        case ExprNode::Kind::Var: {
            const ConstInfo& c = voc.constInfo(bindings[n.slot]);
            if (c.kind != ConstKind::Int) {
                ok = false;  // non-integer binding: the built-in does not hold
                return 0;
            }
            return c.value;
        }
        default: {
            std::int64_t l = evalExprNode(b, n.lhs, bindings, voc, ok);
            std::int64_t r = evalExprNode(b, n.rhs, bindings, voc, ok);
            if (!ok)
                return 0;
            std::int64_t out = 0;
            bool overflow = false;
            switch (n.kind) {
                case ExprNode::Kind::Add: overflow = __builtin_add_overflow(l, r, &out); break;
                case ExprNode::Kind::Sub: overflow = __builtin_sub_overflow(l, r, &out); break;
                case ExprNode::Kind::Mul: overflow = __builtin_mul_overflow(l, r, &out); break;
                default: break;
            }
            if (overflow)
                throw ArithmeticOverflow();
            return out;
        }
    }
}

struct PlanRunner {
    EvalContext& ctx;
    Vocabulary& voc;
    const CompiledRule& rule;
    const Plan& plan;
    const FactView& pos;
    const FactView& neg;
    const DeltaSet* P;
    const DeltaSet* N;
    std::vector<ConstId>& bindings;
    const std::function<bool(const std::vector<ConstId>&)>& cb;

    bool run(std::size_t si) {
        if (si == plan.size()) {
            ctx.fired();
            return cb(bindings);
        }
        const PlanStep& st = plan[si];
        switch (st.kind) {
            case PlanStep::Kind::Pivot: return runPivot(si, rule.positive[st.idx]);
            case PlanStep::Kind::NegPivot: return runNegPivot(si, rule.negative[st.idx]);
            case PlanStep::Kind::Positive: return runPositive(si, st);
            case PlanStep::Kind::Negative: return runNegative(si, st);
            case PlanStep::Kind::Builtin: return runBuiltin(si, rule.builtins[st.idx]);
        }
        return true;
    }

    bool runPivot(std::size_t si, const CompiledAtom& atom) {
        bool cont = true;
        std::vector<std::uint32_t> trail;
        P->forEach([&](FactId f) {
            const GroundFact& gf = ctx.reg->fact(f);
            if (gf.pred != atom.pred)
                return true;
            if (!unifyFact(atom, gf, bindings, trail))
                return true;
            assert(pos.contains(f));  // P ⊆ positive source
            cont = run(si + 1);
            undo(trail);
            return cont;
        });
        return cont;
    }

    bool runNegPivot(std::size_t si, const CompiledAtom& atom) {
        bool cont = true;
        std::vector<std::uint32_t> trail;
        N->forEach([&](FactId f) {
            const GroundFact& gf = ctx.reg->fact(f);
            if (gf.pred != atom.pred)
                return true;
            if (!unifyFact(atom, gf, bindings, trail))
                return true;
            assert(!neg.contains(f));  // N ∩ negative source = ∅
            cont = run(si + 1);
            undo(trail);
            return cont;
        });
        return cont;
    }

    bool runPositive(std::size_t si, const PlanStep& st) {
        const CompiledAtom& atom = rule.positive[st.idx];
        // Fully ground atom: a single membership probe.
        bool allKnown = true;
        for (const CompiledArg& arg : atom.args)
            if (arg.isVar && bindings[arg.slot] == kUnboundSlot)
                allKnown = false;
        if (allKnown) {
            auto gf = groundAtom(atom, bindings);
            FactId id = ctx.reg->lookup(*gf);
            if (id == kNoFact)
                return true;
            if ((pos.enum1 && pos.enum1->contains(id)) || (pos.enum2 && pos.enum2->contains(id)))
                ctx.candidate();
            if (!pos.contains(id))
                return true;
            if (st.excludeDelta && P->contains(id))
                return true;
            return run(si + 1);
        }

        // Pick the bound position with the smallest index bucket.
        int bestPos = -1;
        std::size_t bestSize = 0;
        for (std::size_t p = 0; p < atom.args.size(); ++p) {
            const CompiledArg& arg = atom.args[p];
            ConstId v;
            if (!arg.isVar)
                v = arg.c;
            else if (bindings[arg.slot] != kUnboundSlot)
                v = bindings[arg.slot];
            else
                continue;
            std::size_t sz = 0;
            if (pos.enum1)
                sz += pos.enum1->bucketSize(atom.pred, p, v);
            if (pos.enum2)
                sz += pos.enum2->bucketSize(atom.pred, p, v);
            if (bestPos < 0 || sz < bestSize) {
                bestPos = static_cast<int>(p);
                bestSize = sz;
            }
        }

        std::vector<std::uint32_t> trail;
        auto tryFact = [&](FactId id) -> bool {
            ctx.candidate();
            const GroundFact& gf = ctx.reg->fact(id);
            if (!unifyFact(atom, gf, bindings, trail))
                return true;
            if (!pos.contains(id) || (st.excludeDelta && P->contains(id))) {
                undo(trail);
                return true;
            }
            bool cont = run(si + 1);
            undo(trail);
            return cont;
        };

        if (bestPos >= 0) {
            const CompiledArg& arg = atom.args[bestPos];
            ConstId v = arg.isVar ? bindings[arg.slot] : arg.c;
            if (pos.enum1)
                if (const auto* b = pos.enum1->bucket(atom.pred, bestPos, v))
                    for (FactId id : *b)
                        if (pos.enum1->contains(id) && !tryFact(id))
                            return false;
            if (pos.enum2)
                if (const auto* b = pos.enum2->bucket(atom.pred, bestPos, v))
                    for (FactId id : *b) {
                        if (pos.enum1 && pos.enum1->contains(id))
                            continue;  // already seen via enum1
                        if (pos.enum2->contains(id) && !tryFact(id))
                            return false;
                    }
            return true;
        }

        bool cont = true;
        if (pos.enum1)
            pos.enum1->forEach(atom.pred, [&](FactId id) {
                if (cont)
                    cont = tryFact(id);
            });
        if (cont && pos.enum2)
            pos.enum2->forEach(atom.pred, [&](FactId id) {
                if (cont && !(pos.enum1 && pos.enum1->contains(id)))
                    cont = tryFact(id);
            });
        return cont;
    }

    bool runNegative(std::size_t si, const PlanStep& st) {
        const CompiledAtom& atom = rule.negative[st.idx];
        auto gf = groundAtom(atom, bindings);
        FactId id = ctx.reg->lookup(*gf);
        if (id != kNoFact) {
            if (neg.contains(id))
                return true;  // negative atom holds: instance dies
            if (st.excludeDelta && N->contains(id))
                return true;  // reserved for a later negative pivot
        }
        return run(si + 1);
    }

    bool runBuiltin(std::size_t si, const CompiledBuiltin& b) {
        bool ok = true;
        std::int64_t value = evalExprNode(b, b.root, bindings, voc, ok);
        if (!ok)
            return true;
        if (bindings[b.targetSlot] != kUnboundSlot) {
            const ConstInfo& c = voc.constInfo(bindings[b.targetSlot]);
            if (c.kind != ConstKind::Int || c.value != value)
                return true;
            return run(si + 1);
        }
        bindings[b.targetSlot] = voc.intConst(value);
        bool cont = run(si + 1);
        bindings[b.targetSlot] = kUnboundSlot;
        return cont;
    }

    void undo(std::vector<std::uint32_t>& trail) {
        for (std::uint32_t slot : trail)
            bindings[slot] = kUnboundSlot;
        trail.clear();
    }
};

}  // namespace detail

// Enumerates the instances of `rule` whose positive body lies in `pos`, whose
// negative body misses `neg`, and whose built-ins hold. With P (and N) given,
// only instances touching P (or N) are produced, each exactly once, using the
// standard semi-naive pivot decomposition. With headFact given, the head is
// unified against it first ('backward' evaluation). The callback may return
// false to stop; forEachInstance then returns false.
inline bool forEachInstance(EvalContext& ctx, const CompiledRule& rule, const FactView& pos,
                            const FactView& neg, const DeltaSet* P, const DeltaSet* N, FactId headFact,
                            const std::function<bool(const std::vector<ConstId>&)>& cb) {
    Vocabulary& voc = *const_cast<Vocabulary*>(ctx.prog->voc.get());
    std::vector<ConstId> bindings(rule.varCount, kUnboundSlot);
    std::vector<bool> bound(rule.varCount, false);
    std::vector<std::uint32_t> headTrail;
    if (headFact != kNoFact) {
        if (!detail::unifyFact(rule.head, ctx.reg->fact(headFact), bindings, headTrail))
            return true;
        for (std::uint32_t i = 0; i < rule.varCount; ++i)
            bound[i] = bindings[i] != kUnboundSlot;
    }

    auto runWith = [&](PivotKind pk, int pivotIdx) {
        Plan plan = planBody(rule, pos, bound, pk, pivotIdx);
        detail::PlanRunner runner{ctx, voc, rule, plan, pos, neg, P, N, bindings, cb};
        return runner.run(0);
    };

    if (!P)
        return runWith(PivotKind::None, -1);
    for (std::size_t j = 0; j < rule.positive.size(); ++j)
        if (!runWith(PivotKind::Positive, static_cast<int>(j)))
            return false;
    if (N)
        for (std::size_t k = 0; k < rule.negative.size(); ++k)
            if (!runWith(PivotKind::Negative, static_cast<int>(k)))
                return false;
    return true;
}

inline FactId instanceHead(EvalContext& ctx, const CompiledRule& rule, const std::vector<ConstId>& bindings) {
    auto gf = detail::groundAtom(rule.head, bindings);
    return ctx.reg->intern(*gf);
}

// Multiset application: invokes cb once per rule-instance occurrence with the
// instantiated head. The set projection of the heads equals the plain rule
// application operator.
inline void applyRules(EvalContext& ctx, std::span<const CompiledRule* const> rules, const FactView& pos,
                       const FactView& neg, const DeltaSet* P, const DeltaSet* N,
                       const std::function<void(const CompiledRule&, FactId, const std::vector<ConstId>&)>& cb) {
    for (const CompiledRule* rule : rules)
        forEachInstance(ctx, *rule, pos, neg, P, N, kNoFact, [&](const std::vector<ConstId>& b) {
            cb(*rule, instanceHead(ctx, *rule, b), b);
            return true;
        });
}

// ---------------------------------------------------------------------------
// Matching (partial-instantiation retrieval over one fact set)

// Enumerates every stored fact unifying with `atom` under `bindings`, in
// insertion order, extending the bindings. Used directly by tests and the
// fact-dump paths; rule evaluation goes through forEachInstance.
inline void matchAtom(const FactRegistry& reg, const FactSet& store, const Atom& atom,
                      const std::unordered_map<VarId, ConstId>& bindings,
                      const std::function<void(FactId, const std::unordered_map<VarId, ConstId>&)>& cb) {
    auto valueOf = [&](const Term& t) -> std::optional<ConstId> {
        if (!t.isVar())
            return t.id;
        auto it = bindings.find(t.id);
        if (it != bindings.end())
            return it->second;
        return std::nullopt;
    };
    int bestPos = -1;
    std::size_t bestSize = 0;
    for (std::size_t p = 0; p < atom.args.size(); ++p) {
        auto v = valueOf(atom.args[p]);
        if (!v)
            continue;
        std::size_t sz = store.bucketSize(atom.pred, p, *v);
        if (bestPos < 0 || sz < bestSize) {
            bestPos = static_cast<int>(p);
            bestSize = sz;
        }
    }
    auto tryFact = [&](FactId id) {
        const GroundFact& f = reg.fact(id);
        auto extended = bindings;
        for (std::size_t p = 0; p < atom.args.size(); ++p) {
            const Term& t = atom.args[p];
            if (!t.isVar()) {
                if (t.id != f.args[p])
                    return;
            } else {
                auto [it, inserted] = extended.emplace(t.id, f.args[p]);
                if (!inserted && it->second != f.args[p])
                    return;
            }
        }
        cb(id, extended);
    };
    if (bestPos >= 0) {
        auto v = valueOf(atom.args[bestPos]);
        if (const auto* b = store.bucket(atom.pred, bestPos, *v)) {
            for (FactId id : *b)
                if (store.contains(id))
                    tryFact(id);
        }
    } else {
        store.forEach(atom.pred, tryFact);
    }
}

// ---------------------------------------------------------------------------
// Materialisation

// Computes I = mat(Π, E) stratum by stratum with semi-naive deltas; counters
// are initialised compatibly by counting each nonrecursive/recursive instance
// firing exactly once plus one Cnr per explicit fact.
inline EngineState materialise(std::shared_ptr<const AnalyzedProgram> program,
                               const std::vector<GroundFact>& explicitFacts,
                               CounterMode mode = CounterMode::Both, EvalStats* stats = nullptr) {
    EngineState state;
    state.program = std::move(program);
    state.counterMode = mode;
    EvalContext ctx{state.program.get(), &state.registry, stats};

    for (const GroundFact& f : explicitFacts) {
        FactId id = state.registry.intern(f);
        if (state.explicitFacts.insert(id, state.registry)) {
            state.facts.insert(id, state.registry);
            if (mode != CounterMode::None)
                state.counters.incNonrecursive(id);
        }
    }

    FactView viewI = viewOf(state.facts);
    for (std::uint32_t s = 1; s <= state.program->strat.strataCount; ++s) {
        auto nr = state.program->stratumRules(s, false);
        auto rec = state.program->stratumRules(s, true);

        // Nonrecursive rules: body predicates live strictly below, one pass is
        // the full multiset. Inserts are buffered so index scans stay stable.
        std::vector<FactId> pending;
        applyRules(ctx, nr, viewI, viewI, nullptr, nullptr,
                   [&](const CompiledRule&, FactId head, const std::vector<ConstId>&) {
                       if (mode != CounterMode::None)
                           state.counters.incNonrecursive(head);
                       pending.push_back(head);
                   });

        FactIdSet delta;
        for (FactId id : pending)
            if (state.facts.insert(id, state.registry))
                delta.insert(id);
        (void)delta;  // first recursive pass is unrestricted

        if (rec.empty())
            continue;
        bool first = true;
        FactIdSet current;
        for (;;) {
            pending.clear();
            DeltaSet ds = deltaOf(current);
            applyRules(ctx, rec, viewI, viewI, first ? nullptr : &ds, nullptr,
                       [&](const CompiledRule&, FactId head, const std::vector<ConstId>&) {
                           if (mode == CounterMode::Both)
                               state.counters.incRecursive(head);
                           pending.push_back(head);
                       });
            first = false;
            current.clear();
            for (FactId id : pending)
                if (state.facts.insert(id, state.registry))
                    current.insert(id);
            if (current.empty())
                break;
        }
    }
    return state;
}

// Recomputes both counters from scratch over the current I and E; the counter
// oracle against which maintained counters are checked.
inline CounterMap recountCounters(EngineState& state) {
    CounterMap fresh;
    EvalContext ctx{state.program.get(), &state.registry, nullptr};
    state.explicitFacts.forEachLive([&](FactId id) { fresh.incNonrecursive(id); });
    FactView viewI = viewOf(state.facts);
    for (std::uint32_t s = 1; s <= state.program->strat.strataCount; ++s) {
        for (bool recursive : {false, true}) {
            auto rules = state.program->stratumRules(s, recursive);
            applyRules(ctx, rules, viewI, viewI, nullptr, nullptr,
                       [&](const CompiledRule&, FactId head, const std::vector<ConstId>&) {
                           if (recursive)
                               fresh.incRecursive(head);
                           else
                               fresh.incNonrecursive(head);
                       });
        }
    }
    return fresh;
}

}  // namespace dlivm

#endif
