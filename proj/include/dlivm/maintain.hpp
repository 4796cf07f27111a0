#ifndef DLIVM_MAINTAIN_HPP
#define DLIVM_MAINTAIN_HPP

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dlivm/eval.hpp"

namespace dlivm {

enum class Algo : std::uint8_t { Dred, Dredc, Bf, Bfc };

inline const char* algoName(Algo a) {
    switch (a) {
        case Algo::Dred: return "dred";
        case Algo::Dredc: return "dredc";
        case Algo::Bf: return "bf";
        case Algo::Bfc: return "bfc";
    }
    return "";
}

inline std::optional<Algo> algoFromName(std::string_view s) {
    if (s == "dred")
        return Algo::Dred;
    if (s == "dredc")
        return Algo::Dredc;
    if (s == "bf")
        return Algo::Bf;
    if (s == "bfc")
        return Algo::Bfc;
    return std::nullopt;
}

enum class Phase : std::uint8_t { Overdelete, Rederive, Insert, Check, Saturate };

inline const char* phaseName(Phase p) {
    switch (p) {
        case Phase::Overdelete: return "overdelete";
        case Phase::Rederive: return "rederive";
        case Phase::Insert: return "insert";
        case Phase::Check: return "check";
        case Phase::Saturate: return "saturate";
    }
    return "";
}

struct PhaseStats {
    std::uint64_t instances = 0;
    std::uint64_t backwardCandidates = 0;
    std::uint64_t deleted = 0;
    std::uint64_t added = 0;
    double wallMs = 0;

    PhaseStats& operator+=(const PhaseStats& o) {
        instances += o.instances;
        backwardCandidates += o.backwardCandidates;
        deleted += o.deleted;
        added += o.added;
        wallMs += o.wallMs;
        return *this;
    }
};

// Instrumentation of one incremental update: one row per stratum and phase.
struct UpdateStats {
    struct Row {
        std::uint32_t stratum;
        Phase phase;
        PhaseStats stats;
    };

    std::string algo;
    std::vector<Row> rows;

    PhaseStats totals() const {
        PhaseStats t;
        for (const Row& r : rows)
            t += r.stats;
        return t;
    }

    PhaseStats phaseTotal(Phase p) const {
        PhaseStats t;
        for (const Row& r : rows)
            if (r.phase == p)
                t += r.stats;
        return t;
    }

    static std::string csvHeader() {
        return "algo,stratum,phase,instances,backward_candidates,deleted,added,wall_ms";
    }

    std::string csv() const {
        std::string out = csvHeader() + "\n";
        char buf[64];
        for (const Row& r : rows) {
            std::snprintf(buf, sizeof buf, "%.3f", r.stats.wallMs);
            out += algo + "," + std::to_string(r.stratum) + "," + phaseName(r.phase) + "," +
                   std::to_string(r.stats.instances) + "," + std::to_string(r.stats.backwardCandidates) +
                   "," + std::to_string(r.stats.deleted) + "," + std::to_string(r.stats.added) + "," +
                   buf + "\n";
        }
        return out;
    }
};

struct UpdateHooks {
    std::function<void(std::uint32_t stratum, Phase phase)> afterPhase;
    std::function<void(const CompiledRule&, const std::vector<ConstId>&, Phase)> onInstance;
    std::function<void(FactId, std::uint32_t stratum)> onDeleted;     // fact entered D
    std::function<void(FactId, std::uint32_t stratum)> onRederived;   // fact kept without reevaluation
};

// Drops redundant parts of an update against the current explicit facts:
// deletions of absent facts, insertions of present facts, and delete+insert
// pairs (which must leave the fact in place).
struct NormalizedDelta {
    FactIdSet deletions;   // ⊆ E, disjoint from insertions
    FactIdSet insertions;  // disjoint from E
};

inline NormalizedDelta normalizeDelta(EngineState& state, const ParsedDelta& delta) {
    NormalizedDelta out;
    FactIdSet plus;
    for (const GroundFact& f : delta.insertions)
        plus.insert(state.registry.intern(f));
    for (const GroundFact& f : delta.deletions) {
        FactId id = state.registry.intern(f);
        if (state.explicitFacts.contains(id) && !plus.contains(id))
            out.deletions.insert(id);
    }
    for (FactId id : plus.order())
        if (!state.explicitFacts.contains(id))
            out.insertions.insert(id);
    return out;
}

namespace detail {

class Updater {
public:
    Updater(EngineState& state, const NormalizedDelta& delta, Algo algo, const UpdateHooks* hooks)
        : st_(state), prog_(*state.program), algo_(algo), hooks_(hooks),
          eminus_(delta.deletions), eplus_(delta.insertions) {
        stats_.algo = algoName(algo);
        bool counters = st_.counterMode != CounterMode::None;
        bool both = st_.counterMode == CounterMode::Both;
        if (algo == Algo::Dredc && !both)
            throw Error("dredc requires both derivation counters");
        if (algo == Algo::Bfc && !counters)
            throw Error("bfc requires nonrecursive derivation counters");
        trackCnr_ = counters;
        // Backward/forward maintenance keeps only the nonrecursive counter
        // current; the recursive counter is not consulted and goes stale.
        trackCr_ = both && (algo == Algo::Dred || algo == Algo::Dredc);
    }

    UpdateStats run() {
        for (std::uint32_t s = 1; s <= prog_.strat.strataCount; ++s) {
            if (algo_ == Algo::Dred || algo_ == Algo::Dredc) {
                overdelete(s);
                FactIdSet rederived = rederive(s);
                insertPhase(s, rederived);
            } else {
                deleteUnproved(s);
                insertPhase(s, FactIdSet{});
            }
        }
        finalize();
        return std::move(stats_);
    }

private:
    using Clock = std::chrono::steady_clock;

    static double msSince(Clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    }

    // --- counter upkeep -----------------------------------------------------

    void decNr(FactId f) {
        if (trackCnr_)
            st_.counters.decNonrecursive(f, st_.registry, st_.voc());
    }
    void incNr(FactId f) {
        if (trackCnr_)
            st_.counters.incNonrecursive(f);
    }
    void decR(FactId f) {
        if (trackCr_)
            st_.counters.decRecursive(f, st_.registry, st_.voc());
    }
    void incR(FactId f) {
        if (trackCr_)
            st_.counters.incRecursive(f);
    }

    // --- views --------------------------------------------------------------

    FactView vI() { return viewOf(st_.facts); }

    FactView vIminusDA() {  // I \ (D \ A)
        return {&st_.facts, nullptr, [this](FactId f) {
                    return st_.facts.contains(f) && !(D_.contains(f) && !A_.contains(f));
                }};
    }

    FactView vIuA() {  // I ∪ A
        return {&st_.facts, &A_,
                [this](FactId f) { return st_.facts.contains(f) || A_.contains(f); }};
    }

    FactView vIminusDuA() {  // (I \ D) ∪ A
        return {&st_.facts, &A_, [this](FactId f) {
                    return (st_.facts.contains(f) && !D_.contains(f)) || A_.contains(f);
                }};
    }

    FactView vCheck(const FactIdSet& deltaD) {  // I \ ((D ∪ Δ_D) \ A)
        return {&st_.facts, nullptr, [this, &deltaD](FactId f) {
                    return st_.facts.contains(f) &&
                           !((D_.contains(f) || deltaD.contains(f)) && !A_.contains(f));
                }};
    }

    // Proved facts of this stratum plus the surviving facts of lower strata.
    FactView vProved(const FactSet& proved, std::uint32_t s) {
        return {&proved, &st_.facts, [this, &proved, s](FactId f) {
                    return proved.contains(f) ||
                           (st_.stratumOfFact(f) < s && st_.facts.contains(f) &&
                            !(D_.contains(f) && !A_.contains(f)));
                }};
    }

    // --- rule application helpers ------------------------------------------

    std::vector<const CompiledRule*> allRules(std::uint32_t s) {
        auto out = prog_.stratumRules(s, false);
        auto rec = prog_.stratumRules(s, true);
        out.insert(out.end(), rec.begin(), rec.end());
        return out;
    }

    void applyForward(EvalStats& es, std::span<const CompiledRule* const> rules, const FactView& pos,
                      const FactView& neg, const DeltaSet* P, const DeltaSet* N, Phase phase,
                      const std::function<void(const CompiledRule&, FactId)>& cb) {
        EvalContext ctx{&prog_, &st_.registry, &es};
        applyRules(ctx, rules, pos, neg, P, N,
                   [&](const CompiledRule& r, FactId head, const std::vector<ConstId>& b) {
                       if (hooks_ && hooks_->onInstance)
                           hooks_->onInstance(r, b, phase);
                       cb(r, head);
                   });
    }

    bool derivable(EvalStats& es, FactId f, std::span<const CompiledRule* const> rules,
                   const FactView& pos, const FactView& neg) {
        EvalContext ctx{&prog_, &st_.registry, &es};
        PredId pred = st_.registry.fact(f).pred;
        for (const CompiledRule* r : rules) {
            if (r->head.pred != pred)
                continue;
            bool found = false;
            forEachInstance(ctx, *r, pos, neg, nullptr, nullptr, f, [&](const std::vector<ConstId>&) {
                found = true;
                return false;  // one witness suffices
            });
            if (found)
                return true;
        }
        return false;
    }

    void pushRow(std::uint32_t s, Phase phase, const EvalStats& es, std::uint64_t deleted,
                 std::uint64_t added, bool backward, double wallMs) {
        PhaseStats ps;
        ps.instances = es.instancesFired;
        ps.backwardCandidates = backward ? es.candidates : 0;
        ps.deleted = deleted;
        ps.added = added;
        ps.wallMs = wallMs;
        stats_.rows.push_back({s, phase, ps});
        if (hooks_ && hooks_->afterPhase)
            hooks_->afterPhase(s, phase);
    }

    // --- overdeletion (shared by both counting variants) --------------------

    void overdelete(std::uint32_t s) {
        auto t0 = Clock::now();
        EvalStats es;
        FactIdSet nd;
        for (FactId f : eminus_.order())
            if (st_.stratumOfFact(f) == s) {
                decNr(f);
                nd.insert(f);
            }
        {
            DeltaSet P = deltaDiff(D_, A_), N = deltaDiff(A_, D_);
            FactView view = vI();
            applyForward(es, allRules(s), view, view, &P, &N, Phase::Overdelete,
                         [&](const CompiledRule& r, FactId head) {
                             if (r.recursive)
                                 decR(head);
                             else
                                 decNr(head);
                             nd.insert(head);
                         });
        }
        std::uint64_t deleted = 0;
        auto rec = prog_.stratumRules(s, true);
        for (;;) {
            FactIdSet dd;
            for (FactId f : nd.order())
                if (!D_.contains(f) &&
                    (algo_ != Algo::Dredc || st_.counters.get(f).nonrecursive == 0))
                    dd.insert(f);
            if (dd.empty())
                break;
            FactIdSet next;
            {
                // Evaluated before D absorbs Δ_D so instances spanning two
                // waves of deletions are seen exactly once.
                DeltaSet P = deltaOf(dd);
                FactView pos = vIminusDA(), neg = vIuA();
                applyForward(es, rec, pos, neg, &P, nullptr, Phase::Overdelete,
                             [&](const CompiledRule&, FactId head) {
                                 decR(head);
                                 next.insert(head);
                             });
            }
            for (FactId f : dd.order()) {
                D_.insert(f, st_.registry);
                ++deleted;
                if (hooks_ && hooks_->onDeleted)
                    hooks_->onDeleted(f, s);
            }
            nd = std::move(next);
        }
        pushRow(s, Phase::Overdelete, es, deleted, 0, false, msSince(t0));
    }

    // --- rederivation -------------------------------------------------------

    FactIdSet rederive(std::uint32_t s) {
        auto t0 = Clock::now();
        EvalStats es;
        FactIdSet out;
        if (algo_ == Algo::Dredc) {
            // A positive recursive counter certifies a surviving derivation;
            // no evaluation of any kind is needed.
            D_.forEachLive([&](FactId f) {
                if (st_.stratumOfFact(f) == s && st_.counters.get(f).recursive > 0)
                    out.insert(f);
            });
        } else {
            FactView pos = vIminusDA(), neg = vIuA();
            auto rules = allRules(s);
            D_.forEachLive([&](FactId f) {
                if (st_.stratumOfFact(f) != s)
                    return;
                if ((st_.explicitFacts.contains(f) && !eminus_.contains(f)) ||
                    derivable(es, f, rules, pos, neg))
                    out.insert(f);
            });
        }
        if (hooks_ && hooks_->onRederived)
            for (FactId f : out.order())
                hooks_->onRederived(f, s);
        pushRow(s, Phase::Rederive, es, 0, 0, true, msSince(t0));
        return out;
    }

    // --- insertion (shared by all four algorithms) --------------------------

    void insertPhase(std::uint32_t s, const FactIdSet& rederived) {
        auto t0 = Clock::now();
        EvalStats es;
        FactIdSet na;
        for (FactId f : rederived.order())
            na.insert(f);
        for (FactId f : eplus_.order())
            if (st_.stratumOfFact(f) == s) {
                incNr(f);
                na.insert(f);
            }
        {
            DeltaSet P = deltaDiff(A_, D_), N = deltaDiff(D_, A_);
            FactView view = vIminusDuA();
            applyForward(es, allRules(s), view, view, &P, &N, Phase::Insert,
                         [&](const CompiledRule& r, FactId head) {
                             if (r.recursive)
                                 incR(head);
                             else
                                 incNr(head);
                             na.insert(head);
                         });
        }
        std::uint64_t added = 0;
        auto rec = prog_.stratumRules(s, true);
        for (;;) {
            FactIdSet da;
            for (FactId f : na.order())
                if (!((st_.facts.contains(f) && !D_.contains(f)) || A_.contains(f)))
                    da.insert(f);
            if (da.empty())
                break;
            for (FactId f : da.order()) {
                A_.insert(f, st_.registry);
                ++added;
            }
            FactIdSet next;
            {
                DeltaSet P = deltaOf(da);
                FactView view = vIminusDuA();
                applyForward(es, rec, view, view, &P, nullptr, Phase::Insert,
                             [&](const CompiledRule&, FactId head) {
                                 incR(head);
                                 next.insert(head);
                             });
            }
            na = std::move(next);
        }
        pushRow(s, Phase::Insert, es, 0, added, false, msSince(t0));
    }

    // --- backward/forward deletion ------------------------------------------

    void deleteUnproved(std::uint32_t s) {
        auto t0 = Clock::now();
        EvalStats odEs, checkEs, satEs;
        double checkMs = 0, satMs = 0;
        FactSet proved;
        FactIdSet checked, delayed;  // C and Y
        FactIdSet nd;
        for (FactId f : eminus_.order())
            if (st_.stratumOfFact(f) == s) {
                decNr(f);
                nd.insert(f);
            }
        {
            DeltaSet P = deltaDiff(D_, A_), N = deltaDiff(A_, D_);
            FactView view = vI();
            applyForward(odEs, allRules(s), view, view, &P, &N, Phase::Overdelete,
                         [&](const CompiledRule& r, FactId head) {
                             if (!r.recursive)
                                 decNr(head);
                             nd.insert(head);
                         });
        }
        std::uint64_t deleted = 0;
        auto rec = prog_.stratumRules(s, true);
        for (;;) {
            FactIdSet dd;
            for (FactId f : nd.order()) {
                if (D_.contains(f) || proved.contains(f))
                    continue;
                if (!checked.contains(f))
                    check(f, s, dd, proved, checked, delayed, checkEs, satEs, checkMs, satMs);
                if (!proved.contains(f))
                    dd.insert(f);
            }
            if (dd.empty())
                break;
            FactIdSet next;
            {
                DeltaSet P = deltaOf(dd);
                FactView pos = vIminusDA(), neg = vIuA();
                applyForward(odEs, rec, pos, neg, &P, nullptr, Phase::Overdelete,
                             [&](const CompiledRule&, FactId head) { next.insert(head); });
            }
            for (FactId f : dd.order()) {
                D_.insert(f, st_.registry);
                ++deleted;
                if (hooks_ && hooks_->onDeleted)
                    hooks_->onDeleted(f, s);
            }
            nd = std::move(next);
        }
        double total = msSince(t0);
        pushRow(s, Phase::Overdelete, odEs, deleted, 0, false, total - checkMs - satMs);
        pushRow(s, Phase::Check, checkEs, 0, 0, true, checkMs);
        pushRow(s, Phase::Saturate, satEs, 0, 0, true, satMs);
    }

    // Decides whether f survives the deletion: explores its same-stratum
    // support backwards (recursive rules only), saturating forwards from every
    // support fact that still has an independent proof.
    void check(FactId f0, std::uint32_t s, const FactIdSet& deltaD, FactSet& proved,
               FactIdSet& checked, FactIdSet& delayed, EvalStats& checkEs, EvalStats& satEs,
               double& checkMs, double& satMs) {
        auto t0 = Clock::now();
        double satBefore = satMs;

        struct Frame {
            FactId f;
            std::vector<FactId> children;
            std::size_t next = 0;
        };
        std::vector<Frame> stack;
        FactView pos = vCheck(deltaD), neg = vIuA();
        auto rec = prog_.stratumRules(s, true);
        EvalContext ctx{&prog_, &st_.registry, &checkEs};

        auto open = [&](FactId f) {
            saturate(f, s, deltaD, proved, checked, delayed, satEs, satMs);
            Frame fr{f, {}, 0};
            if (!proved.contains(f)) {
                PredId pred = st_.registry.fact(f).pred;
                for (const CompiledRule* r : rec) {
                    if (r->head.pred != pred)
                        continue;
                    forEachInstance(ctx, *r, pos, neg, nullptr, nullptr, f,
                                    [&](const std::vector<ConstId>& b) {
                                        for (const CompiledAtom& a : r->positive) {
                                            if (prog_.stratumOf(a.pred) != s)
                                                continue;
                                            GroundFact g;
                                            g.pred = a.pred;
                                            for (const CompiledArg& arg : a.args)
                                                g.args.push_back(arg.isVar ? b[arg.slot] : arg.c);
                                            fr.children.push_back(st_.registry.intern(g));
                                        }
                                        return true;
                                    });
                }
            }
            stack.push_back(std::move(fr));
        };

        open(f0);
        while (!stack.empty()) {
            Frame& fr = stack.back();
            if (proved.contains(fr.f) || fr.next >= fr.children.size()) {
                stack.pop_back();
                continue;
            }
            FactId g = fr.children[fr.next++];
            if (!checked.contains(g))
                open(g);  // invalidates fr; the loop re-fetches the top frame
        }
        checkMs += msSince(t0) - (satMs - satBefore);
    }

    // If f has a proof not relying on anything being deleted, closes the set
    // of proved facts forwards from f. Derived facts not yet checked are
    // remembered (Y) so their own saturation succeeds immediately.
    void saturate(FactId f, std::uint32_t s, const FactIdSet& deltaD, FactSet& proved,
                  FactIdSet& checked, FactIdSet& delayed, EvalStats& satEs, double& satMs) {
        auto t0 = Clock::now();
        checked.insert(f);
        bool base = delayed.contains(f);
        if (!base) {
            if (algo_ == Algo::Bfc) {
                base = st_.counters.get(f).nonrecursive > 0;
            } else {
                base = st_.explicitFacts.contains(f) && !eminus_.contains(f);
                if (!base) {
                    FactView pos = vCheck(deltaD), neg = vIuA();
                    base = derivable(satEs, f, prog_.stratumRules(s, false), pos, neg);
                }
            }
        }
        if (base) {
            FactIdSet np;
            np.insert(f);
            auto rec = prog_.stratumRules(s, true);
            for (;;) {
                FactIdSet dp;
                for (FactId g : np.order()) {
                    if (checked.contains(g)) {
                        if (!proved.contains(g))
                            dp.insert(g);
                    } else {
                        delayed.insert(g);
                    }
                }
                if (dp.empty())
                    break;
                for (FactId g : dp.order())
                    proved.insert(g, st_.registry);
                FactIdSet next;
                DeltaSet P = deltaOf(dp);
                FactView pos = vProved(proved, s), neg = vIuA();
                EvalContext ctx{&prog_, &st_.registry, &satEs};
                applyRules(ctx, rec, pos, neg, &P, nullptr,
                           [&](const CompiledRule&, FactId head, const std::vector<ConstId>&) {
                               next.insert(head);
                           });
                np = std::move(next);
            }
        }
        satMs += msSince(t0);
    }

    // --- commit -------------------------------------------------------------

    void finalize() {
        D_.forEachLive([&](FactId f) {
            if (!A_.contains(f))
                st_.facts.erase(f);
        });
        A_.forEachLive([&](FactId f) { st_.facts.insert(f, st_.registry); });
        for (FactId f : eminus_.order())
            st_.explicitFacts.erase(f);
        for (FactId f : eplus_.order())
            st_.explicitFacts.insert(f, st_.registry);
    }

    EngineState& st_;
    const AnalyzedProgram& prog_;
    Algo algo_;
    const UpdateHooks* hooks_;
    FactIdSet eminus_, eplus_;
    FactSet D_, A_;
    bool trackCnr_ = false, trackCr_ = false;
    UpdateStats stats_;
};

}  // namespace detail

inline UpdateStats applyUpdate(EngineState& state, Algo algo, const ParsedDelta& delta,
                               const UpdateHooks* hooks = nullptr) {
    NormalizedDelta nd = normalizeDelta(state, delta);
    return detail::Updater(state, nd, algo, hooks).run();
}

inline UpdateStats dredUpdate(EngineState& s, const ParsedDelta& d, const UpdateHooks* h = nullptr) {
    return applyUpdate(s, Algo::Dred, d, h);
}
inline UpdateStats dredcUpdate(EngineState& s, const ParsedDelta& d, const UpdateHooks* h = nullptr) {
    return applyUpdate(s, Algo::Dredc, d, h);
}
inline UpdateStats bfUpdate(EngineState& s, const ParsedDelta& d, const UpdateHooks* h = nullptr) {
    return applyUpdate(s, Algo::Bf, d, h);
}
inline UpdateStats bfcUpdate(EngineState& s, const ParsedDelta& d, const UpdateHooks* h = nullptr) {
    return applyUpdate(s, Algo::Bfc, d, h);
}

}  // namespace dlivm

#endif
