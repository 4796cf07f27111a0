// Acceptance suite: one [PASS]/[FAIL] line per criterion, nonzero exit on any
// failure. Built as a plain executable so the output reads as a checklist.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <unordered_set>
#include <vector>

#include "dlivm/dlivm.hpp"
#include "naive_oracle.hpp"

using namespace dlivm;
using Clock = std::chrono::steady_clock;

namespace {

double msSince(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

int failures = 0;

void report(int n, const std::string& what, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", n, what.c_str(),
                detail.empty() ? "" : " — ", detail.c_str());
    std::fflush(stdout);
    if (!ok)
        ++failures;
}

RandomSpec fuzzSpec(std::uint64_t seed) {
    RandomSpec spec;
    spec.seed = seed;
    spec.rules = 1 + static_cast<std::uint32_t>(seed % 6);        // ≤ 6 rules
    spec.facts = 40 + static_cast<std::uint32_t>(seed * 7 % 161); // ≤ 200 facts
    spec.predicates = 3 + static_cast<std::uint32_t>(seed % 3);
    spec.allowBuiltins = seed % 7 == 0;
    return spec;
}

// Criteria 1 and 2 share one pass over the fuzz corpus.
void fuzzSuite() {
    bool factsOk = true, countersOk = true;
    std::string factsDetail, countersDetail;
    auto t0 = Clock::now();
    const Algo algos[] = {Algo::Dred, Algo::Dredc, Algo::Bf, Algo::Bfc};
    for (std::uint64_t seed = 1; seed <= 500 && factsOk && countersOk; ++seed) {
        LoadedInstance inst = loadInstance(genRandom(fuzzSpec(seed)));
        ParsedDelta delta = randomUpdate(*inst.voc, inst.facts, inst.facts.size() / 5,
                                         inst.facts.size() / 10, seed * 31 + 1);
        for (Algo algo : algos) {
            EngineState state = materialise(inst.program, inst.facts, CounterMode::Both);
            applyUpdate(state, algo, delta);
            VerifyReport r = verifyUpdate(state, inst.facts, delta);
            if (!r.pass) {
                factsOk = false;
                factsDetail = "seed " + std::to_string(seed) + " algo " + algoName(algo) + ": " +
                              r.summary();
                break;
            }
            if (algo == Algo::Dredc || algo == Algo::Bfc) {
                CounterMap fresh = recountCounters(state);
                if (!state.counters.equal(fresh, state.registry.size(), algo == Algo::Dredc)) {
                    countersOk = false;
                    countersDetail = "seed " + std::to_string(seed) + " algo " + algoName(algo);
                    break;
                }
            }
        }
    }
    double ms = msSince(t0);
    if (factsOk && ms >= 60000) {
        factsOk = false;
        factsDetail = "took " + std::to_string(ms) + " ms (limit 60000)";
    }
    if (factsOk)
        factsDetail = "500 instances x 4 algorithms in " + std::to_string(static_cast<int>(ms)) + " ms";
    report(1, "randomised updates match the rematerialisation oracle", factsOk, factsDetail);
    report(2, "maintained counters equal a fresh recount after every counter-guided update",
           countersOk, countersDetail);
}

void counterTrace() {
    bool ok = true;
    std::string detail;
    auto expect = [&](bool cond, const std::string& what) {
        if (ok && !cond) {
            ok = false;
            detail = what;
        }
    };

    LoadedInstance inst = loadInstance(genExample3());
    EngineState state = materialise(inst.program, inst.facts, CounterMode::Both);
    auto counterOf = [&](EngineState& st, const CounterMap& m, const char* name) {
        GroundFact f;
        f.pred = inst.voc->pred("A", 1);
        f.args.push_back(inst.voc->symbolConst(name));
        FactId id = st.registry.lookup(f);
        return id == kNoFact ? Counters{} : m.get(id);
    };
    auto eq = [](Counters c, std::uint64_t nr, std::uint64_t r) {
        return c.nonrecursive == nr && c.recursive == r;
    };

    expect(eq(counterOf(state, state.counters, "a"), 1, 0) &&
               eq(counterOf(state, state.counters, "b"), 1, 0) &&
               eq(counterOf(state, state.counters, "c"), 0, 2) &&
               eq(counterOf(state, state.counters, "d"), 1, 1) &&
               eq(counterOf(state, state.counters, "e"), 0, 1),
           "initial counters (T1)");

    std::vector<std::string> deleted, rederived;
    CounterMap mid;
    UpdateHooks hooks;
    hooks.onDeleted = [&](FactId f, std::uint32_t) {
        deleted.push_back(renderFact(*inst.voc, state.registry.fact(f)));
    };
    hooks.onRederived = [&](FactId f, std::uint32_t) {
        rederived.push_back(renderFact(*inst.voc, state.registry.fact(f)));
    };
    hooks.afterPhase = [&](std::uint32_t s, Phase p) {
        if (s == 2 && p == Phase::Overdelete)
            mid = state.counters;
    };
    ParsedDelta delta = parseDelta(*inst.voc, "- A(a).\n");
    applyUpdate(state, Algo::Dredc, delta, &hooks);

    std::sort(deleted.begin(), deleted.end());
    expect(deleted == std::vector<std::string>{"A(a).", "A(c)."}, "overdeleted set");
    expect(rederived == std::vector<std::string>{"A(c)."}, "rederived set");
    expect(eq(counterOf(state, mid, "a"), 0, 0) && eq(counterOf(state, mid, "b"), 1, 0) &&
               eq(counterOf(state, mid, "c"), 0, 1) && eq(counterOf(state, mid, "d"), 1, 0) &&
               eq(counterOf(state, mid, "e"), 0, 1),
           "counters after overdeletion (T2)");
    expect(eq(counterOf(state, state.counters, "a"), 0, 0) &&
               eq(counterOf(state, state.counters, "b"), 1, 0) &&
               eq(counterOf(state, state.counters, "c"), 0, 1) &&
               eq(counterOf(state, state.counters, "d"), 1, 1) &&
               eq(counterOf(state, state.counters, "e"), 0, 1),
           "final counters (T3)");

    // Without counters to stop it, delete/rederive overdeletes the whole suffix.
    EngineState plain = materialise(inst.program, inst.facts, CounterMode::Both);
    std::vector<std::string> plainDeleted;
    UpdateHooks plainHooks;
    plainHooks.onDeleted = [&](FactId f, std::uint32_t) {
        plainDeleted.push_back(renderFact(*inst.voc, plain.registry.fact(f)));
    };
    applyUpdate(plain, Algo::Dred, delta, &plainHooks);
    std::sort(plainDeleted.begin(), plainDeleted.end());
    expect(plainDeleted == std::vector<std::string>{"A(a).", "A(c).", "A(d).", "A(e)."},
           "plain delete/rederive overdeleted set");

    report(3, "the chain-instance counter trace is reproduced exactly", ok, detail);
}

struct ScalingPoint {
    std::uint64_t dredBackward = 0;
    std::uint64_t dredcBackward = 0;
    std::uint64_t dredInstances = 0;
    std::uint64_t dredcInstances = 0;
};

ScalingPoint scalingPoint(const LoadedInstance& inst, const ParsedDelta& delta) {
    ScalingPoint p;
    {
        EngineState state = materialise(inst.program, inst.facts, CounterMode::Both);
        UpdateStats stats = applyUpdate(state, Algo::Dred, delta);
        p.dredBackward = stats.phaseTotal(Phase::Rederive).backwardCandidates;
        p.dredInstances = stats.totals().instances;
    }
    {
        EngineState state = materialise(inst.program, inst.facts, CounterMode::Both);
        UpdateStats stats = applyUpdate(state, Algo::Dredc, delta);
        p.dredcBackward = stats.totals().backwardCandidates;
        p.dredcInstances = stats.totals().instances;
    }
    return p;
}

void joinScaling() {
    bool ok = true;
    std::string detail;
    auto t0 = Clock::now();
    std::vector<ScalingPoint> points;
    for (std::uint32_t n : {100u, 200u}) {
        LoadedInstance inst = loadInstance(genExample1(n));
        ParsedDelta delta;
        for (const GroundFact& f : inst.facts)
            if (inst.voc->renderConst(f.args[1])[0] == 'c')
                delta.deletions.push_back(f);
        points.push_back(scalingPoint(inst, delta));
    }
    double ratio = static_cast<double>(points[1].dredBackward) /
                   static_cast<double>(points[0].dredBackward);
    char buf[160];
    std::snprintf(buf, sizeof buf, "rederivation candidate ratio %.2f", ratio);
    detail = buf;
    if (ratio < 3.2 || ratio > 4.8)
        ok = false;
    for (const ScalingPoint& p : points) {
        if (p.dredcBackward != 0) {
            ok = false;
            detail += "; counter-guided rederivation did backward work";
        }
        if (p.dredcInstances > p.dredInstances) {
            ok = false;
            detail += "; counter-guided variant fired more instances";
        }
    }
    double ms = msSince(t0);
    if (ms >= 10000) {
        ok = false;
        detail += "; took " + std::to_string(ms) + " ms (limit 10000)";
    }
    report(4, "join benchmark shows quadratic vs zero rederivation work", ok, detail);
}

void pathScaling() {
    bool ok = true;
    std::string detail;
    std::vector<ScalingPoint> points;
    for (std::uint32_t n : {100u, 200u}) {
        LoadedInstance inst = loadInstance(genExample2(n));
        ParsedDelta delta;
        delta.deletions.push_back(inst.facts.front());  // B(a,b1,1)
        points.push_back(scalingPoint(inst, delta));
    }
    double ratio = static_cast<double>(points[1].dredBackward) /
                   static_cast<double>(points[0].dredBackward);
    char buf[160];
    std::snprintf(buf, sizeof buf, "path ratio %.2f", ratio);
    detail = buf;
    if (ratio < 3.2 || ratio > 4.8)
        ok = false;
    for (const ScalingPoint& p : points)
        if (p.dredcBackward != 0 || p.dredcInstances > p.dredInstances) {
            ok = false;
            detail += "; counter-guided variant regressed";
        }

    const Algo algos[] = {Algo::Dred, Algo::Dredc, Algo::Bf, Algo::Bfc};
    for (std::uint64_t seed = 1; seed <= 10 && ok; ++seed) {
        LoadedInstance inst = loadInstance(genSspe(1000, 10000, seed));
        ParsedDelta delta = randomDelete(inst.facts, 100, seed);
        std::uint64_t dredInstances = 0;
        for (Algo algo : algos) {
            EngineState state = materialise(inst.program, inst.facts, CounterMode::Both);
            UpdateStats stats = applyUpdate(state, algo, delta);
            if (!verifyUpdate(state, inst.facts, delta).pass) {
                ok = false;
                detail += "; DAG seed " + std::to_string(seed) + " algo " + algoName(algo) +
                          " disagrees with the oracle";
                break;
            }
            if (algo == Algo::Dred)
                dredInstances = stats.totals().instances;
            if (algo == Algo::Dredc && stats.totals().instances > dredInstances) {
                ok = false;
                detail += "; DAG seed " + std::to_string(seed) +
                          ": counter-guided variant fired more instances";
            }
        }
    }
    report(5, "path benchmark and DAG runs keep the same backward-work split", ok, detail);
}

void countingOptimality() {
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 100 && ok; ++seed) {
        RandomSpec spec = fuzzSpec(seed);
        spec.allowRecursion = false;
        spec.allowBuiltins = false;
        LoadedInstance inst = loadInstance(genRandom(spec));
        ParsedDelta delta = randomUpdate(*inst.voc, inst.facts, inst.facts.size() / 5,
                                         inst.facts.size() / 10, seed * 17 + 3);

        std::vector<GroundFact> newE;
        {
            std::unordered_set<GroundFact, GroundFactHash> e(inst.facts.begin(), inst.facts.end());
            for (const GroundFact& f : delta.deletions)
                e.erase(f);
            for (const GroundFact& f : delta.insertions)
                e.insert(f);
            newE.assign(e.begin(), e.end());
        }
        oracle::FactBag before = oracle::naiveMat(*inst.voc, inst.program->program, inst.facts);
        oracle::FactBag after = oracle::naiveMat(*inst.voc, inst.program->program, newE);
        oracle::InstanceBag bagBefore = oracle::allInstances(*inst.voc, inst.program->program, before);
        oracle::InstanceBag bagAfter = oracle::allInstances(*inst.voc, inst.program->program, after);
        oracle::InstanceBag expected;
        for (const auto& [key, count] : bagBefore) {
            auto it = bagAfter.find(key);
            std::uint64_t other = it == bagAfter.end() ? 0 : it->second;
            if (count > other)
                expected[key] = count - other;
        }
        for (const auto& [key, count] : bagAfter) {
            auto it = bagBefore.find(key);
            std::uint64_t other = it == bagBefore.end() ? 0 : it->second;
            if (count > other)
                expected[key] = count - other;
        }

        oracle::InstanceBag fired;
        UpdateHooks hooks;
        hooks.onInstance = [&](const CompiledRule& r, const std::vector<ConstId>& b, Phase) {
            oracle::Bindings env;
            for (std::uint32_t i = 0; i < r.varCount; ++i)
                env[r.slotNames[i]] = b[i];
            ++fired[oracle::keyOf(r.index, env)];
        };
        EngineState state = materialise(inst.program, inst.facts, CounterMode::Both);
        applyUpdate(state, Algo::Dredc, delta, &hooks);
        if (fired != expected) {
            ok = false;
            detail = "seed " + std::to_string(seed) + ": fired " +
                     std::to_string(fired.size()) + " distinct instances, expected " +
                     std::to_string(expected.size());
        }
    }
    report(6, "on nonrecursive programs the counting update fires exactly the instance difference",
           ok, detail);
}

void counterOverhead() {
    LoadedInstance inst = loadInstance(genSspe(1000, 10000, 1));
    auto timeMat = [&](CounterMode mode) {
        double best = 1e18;
        for (int run = 0; run < 3; ++run) {
            auto t0 = Clock::now();
            EngineState state = materialise(inst.program, inst.facts, mode);
            best = std::min(best, msSince(t0));
        }
        return best;
    };
    double plain = timeMat(CounterMode::None);
    double counted = timeMat(CounterMode::Both);
    bool ok = counted <= 1.5 * plain;
    char buf[160];
    std::snprintf(buf, sizeof buf, "with counters %.1f ms vs %.1f ms without (ratio %.2f, limit 1.5)",
                  counted, plain, plain > 0 ? counted / plain : 0.0);
    report(7, "maintaining counters during materialisation stays cheap", ok, buf);
}

void inverseRestoration() {
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 100 && ok; ++seed) {
        LoadedInstance inst = loadInstance(genRandom(fuzzSpec(seed + 600)));
        EngineState original = materialise(inst.program, inst.facts, CounterMode::Both);
        EngineState state = original;
        ParsedDelta down = randomDelete(inst.facts, inst.facts.size() / 5, seed);
        ParsedDelta up;
        up.insertions = down.deletions;
        applyUpdate(state, Algo::Dredc, down);
        applyUpdate(state, Algo::Dredc, up);
        bool same = renderSortedFacts(state) == renderSortedFacts(original) &&
                    state.explicitFacts.size() == original.explicitFacts.size() &&
                    state.counters.equal(original.counters, original.registry.size(), true);
        if (same)
            original.explicitFacts.forEachLive([&](FactId id) {
                if (!state.explicitFacts.contains(id))
                    same = false;
            });
        if (!same) {
            ok = false;
            detail = "seed " + std::to_string(seed);
        }
    }
    report(8, "deleting a subset and reinserting it restores the state bit-exactly", ok, detail);
}

}  // namespace

int main() {
    fuzzSuite();
    counterTrace();
    joinScaling();
    pathScaling();
    countingOptimality();
    counterOverhead();
    inverseRestoration();
    return failures == 0 ? 0 : 1;
}
