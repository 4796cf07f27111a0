#ifndef DLIVM_HARNESS_HPP
#define DLIVM_HARNESS_HPP

#include <algorithm>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "dlivm/maintain.hpp"

namespace dlivm {

// A generated benchmark instance as source text, so generation is decoupled
// from parsing and byte-identical for a fixed seed.
struct GeneratedInstance {
    std::string program;
    std::string facts;

    friend bool operator==(const GeneratedInstance&, const GeneratedInstance&) = default;
};

// A parsed-and-analyzed instance ready to materialise.
struct LoadedInstance {
    std::shared_ptr<Vocabulary> voc;
    std::shared_ptr<const AnalyzedProgram> program;
    std::vector<GroundFact> facts;
};

inline LoadedInstance loadInstance(const GeneratedInstance& gen) {
    LoadedInstance out;
    out.voc = std::make_shared<Vocabulary>();
    out.program = analyze(out.voc, parseProgram(*out.voc, gen.program));
    out.facts = parseFacts(*out.voc, gen.facts);
    return out;
}

// ---------------------------------------------------------------------------
// Generators

// Join benchmark: one rule pairing the successors of a shared source; deleting
// the R(_,c_i) facts forces quadratic backward rederivation work.
inline GeneratedInstance genExample1(std::uint32_t n) {
    GeneratedInstance out;
    out.program = "S(Y1,Y2) :- R(X,Y1), R(X,Y2).\n";
    for (std::uint32_t i = 1; i <= n; ++i) {
        out.facts += "R(a" + std::to_string(i) + ",b).\n";
        out.facts += "R(a" + std::to_string(i) + ",c" + std::to_string(i) + ").\n";
    }
    return out;
}

inline std::string pathProgram() {
    return "D(Y,Z) :- B(a,Y,Z).\n"
           "D(Y,Z) :- D(X,Z1), B(X,Y,Z2), Z = Z1 + Z2.\n";
}

// Path-length benchmark: B(s,t,n) is an edge of length n, D(t,n) a path of
// length n from a. Deleting B(a,b1,1) makes backward rederivation of every
// D(d_j,2) scan n candidates.
inline GeneratedInstance genExample2(std::uint32_t n) {
    GeneratedInstance out;
    out.program = pathProgram();
    out.facts = "B(a,b1,1).\n";
    for (std::uint32_t i = 1; i <= n; ++i)
        out.facts += "B(a,c" + std::to_string(i) + ",1).\n";
    for (std::uint32_t i = 1; i <= n; ++i)
        for (std::uint32_t j = 1; j <= n; ++j)
            out.facts += "B(b" + std::to_string(i) + ",d" + std::to_string(j) + ",1).\n";
    return out;
}

// Chain benchmark for the counter traces: one recursive reachability rule.
inline GeneratedInstance genExample3() {
    return {"A(Y) :- A(X), B(X,Y).\n",
            "A(a).\nA(b).\nA(d).\nB(a,c).\nB(b,c).\nB(c,d).\nB(d,e).\n"};
}

// Single-source path exploration over a random DAG: nodes are ranked and all
// edges point forward in rank order, which guarantees acyclicity. Node 0 is
// the source `a`. Edge lengths default to 1; variedLengths draws them from
// 1..5 instead.
inline GeneratedInstance genSspe(std::uint32_t nodes, std::uint64_t edges, std::uint64_t seed,
                                 bool variedLengths = false) {
    if (nodes == 0)
        throw InfeasibleGraph("graph needs at least one node");
    std::uint64_t maxEdges = static_cast<std::uint64_t>(nodes) * (nodes - 1) / 2;
    if (edges > maxEdges)
        throw InfeasibleGraph(std::to_string(edges) + " distinct forward edges over " +
                              std::to_string(nodes) + " nodes (max " + std::to_string(maxEdges) + ")");
    std::mt19937_64 rng(seed);
    auto nodeName = [](std::uint32_t i) { return i == 0 ? std::string("a") : "n" + std::to_string(i); };

    std::unordered_set<std::uint64_t> chosen;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> picked;
    picked.reserve(edges);
    while (picked.size() < edges) {
        // Uniform over the maxEdges forward pairs, by lexicographic pair index.
        std::uint64_t p = rng() % maxEdges;
        std::uint32_t i = 0;
        std::uint64_t row = nodes - 1;
        while (p >= row) {
            p -= row;
            ++i;
            --row;
        }
        std::uint32_t j = i + 1 + static_cast<std::uint32_t>(p);
        std::uint64_t code = static_cast<std::uint64_t>(i) * nodes + j;
        if (chosen.insert(code).second)
            picked.emplace_back(i, j);
    }

    GeneratedInstance out;
    out.program = pathProgram();
    for (auto [i, j] : picked) {
        std::uint64_t len = variedLengths ? 1 + rng() % 5 : 1;
        out.facts += "B(" + nodeName(i) + "," + nodeName(j) + "," + std::to_string(len) + ").\n";
    }
    return out;
}

// Knobs for the random program/dataset generator.
struct RandomSpec {
    std::uint32_t rules = 4;
    std::uint32_t predicates = 4;
    std::uint32_t constants = 12;
    std::uint32_t facts = 80;
    std::uint64_t seed = 0;
    bool allowRecursion = true;
    bool allowNegation = true;
    bool allowBuiltins = false;
};

// Random stratified program + dataset. Predicates are layered by index:
// positive body atoms use predicates of index at most the head's (equal index
// only when recursion is on), negative atoms strictly lower index. Cycles can
// therefore only be positive self-loops, so the program is always
// stratifiable.
inline GeneratedInstance genRandom(const RandomSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    auto r = [&](std::uint64_t n) { return n == 0 ? 0 : static_cast<std::uint32_t>(rng() % n); };

    std::uint32_t npred = std::max<std::uint32_t>(spec.predicates, 1);
    std::vector<std::uint32_t> arity(npred);
    for (auto& a : arity)
        a = 1 + r(2);
    auto predName = [](std::uint32_t p) { return "p" + std::to_string(p); };
    auto constName = [&](std::uint32_t c) {
        return spec.allowBuiltins ? std::to_string(c) : "k" + std::to_string(c);
    };
    std::uint32_t nconst = std::max<std::uint32_t>(spec.constants, 1);

    GeneratedInstance out;
    for (std::uint32_t t = 0; t < spec.rules; ++t) {
        std::uint32_t head = npred > 1 ? 1 + r(npred - 1) : 0;
        std::vector<std::string> body;
        std::vector<std::string> bound;  // variable names bound by positive atoms
        auto atomOf = [&](std::uint32_t pred, bool negative) {
            std::string s = negative ? "not " : "";
            s += predName(pred) + "(";
            for (std::uint32_t k = 0; k < arity[pred]; ++k) {
                if (k)
                    s += ",";
                bool useVar = negative ? (!bound.empty() && r(2) == 0) : r(10) < 7;
                if (useVar) {
                    std::string v = negative ? bound[r(bound.size())] : "V" + std::to_string(r(4));
                    if (!negative &&
                        std::find(bound.begin(), bound.end(), v) == bound.end())
                        bound.push_back(v);
                    s += v;
                } else {
                    s += constName(r(nconst));
                }
            }
            return s + ")";
        };
        bool recursive = false;
        if (npred > 1 || spec.allowRecursion) {
            std::uint32_t npos = 1 + r(2);
            for (std::uint32_t k = 0; k < npos; ++k) {
                std::uint32_t limit = spec.allowRecursion ? head + 1 : std::max<std::uint32_t>(head, 1);
                std::uint32_t pred = r(limit);
                recursive = recursive || pred == head;
                body.push_back(atomOf(pred, false));
            }
            if (spec.allowNegation && head >= 1 && r(3) == 0)
                body.push_back(atomOf(r(head), true));
        }
        std::string target;
        // Built-ins stay out of recursive rules: a self-loop that keeps
        // producing fresh integers would never reach a fixpoint.
        if (spec.allowBuiltins && !recursive && !bound.empty() && r(3) == 0) {
            target = "T" + std::to_string(t);
            body.push_back(target + " = " + bound[r(bound.size())] + " + " +
                           std::to_string(r(5)));
        }
        std::string headAtom = predName(head) + "(";
        for (std::uint32_t k = 0; k < arity[head]; ++k) {
            if (k)
                headAtom += ",";
            std::uint32_t pool = static_cast<std::uint32_t>(bound.size()) + (target.empty() ? 0 : 1);
            if (pool > 0 && r(10) < 8) {
                std::uint32_t pick = r(pool);
                headAtom += pick < bound.size() ? bound[pick] : target;
            } else {
                headAtom += constName(r(nconst));
            }
        }
        headAtom += ")";
        out.program += headAtom;
        if (!body.empty()) {
            out.program += " :- ";
            for (std::size_t k = 0; k < body.size(); ++k) {
                if (k)
                    out.program += ", ";
                out.program += body[k];
            }
        }
        out.program += ".\n";
    }
    for (std::uint32_t f = 0; f < spec.facts; ++f) {
        std::uint32_t p = r(npred);
        out.facts += predName(p) + "(";
        for (std::uint32_t k = 0; k < arity[p]; ++k) {
            if (k)
                out.facts += ",";
            out.facts += constName(r(nconst));
        }
        out.facts += ").\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Random updates

// Uniform k-subset of E as deletions, chosen by partial Fisher-Yates.
inline ParsedDelta randomDelete(const std::vector<GroundFact>& E, std::size_t k, std::uint64_t seed) {
    if (k > E.size())
        throw Error("cannot delete " + std::to_string(k) + " of " + std::to_string(E.size()) +
                    " facts");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> idx(E.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        idx[i] = i;
    ParsedDelta delta;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + rng() % (idx.size() - i);
        std::swap(idx[i], idx[j]);
        delta.deletions.push_back(E[idx[i]]);
    }
    return delta;
}

// Random mixed update: up to delMax deletions from E and insMax fresh facts
// assembled from the predicates and constants already occurring in E.
inline ParsedDelta randomUpdate(Vocabulary& voc, const std::vector<GroundFact>& E,
                                std::size_t delMax, std::size_t insMax, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::size_t k = E.empty() ? 0 : rng() % (std::min(delMax, E.size()) + 1);
    ParsedDelta delta = randomDelete(E, k, rng());
    std::vector<ConstId> pool;
    {
        std::unordered_set<ConstId> seen;
        for (const GroundFact& f : E)
            for (ConstId c : f.args)
                if (seen.insert(c).second)
                    pool.push_back(c);
    }
    if (!pool.empty() && voc.predCount() > 0) {
        std::size_t ins = rng() % (insMax + 1);
        for (std::size_t i = 0; i < ins; ++i) {
            GroundFact f;
            f.pred = static_cast<PredId>(rng() % voc.predCount());
            for (std::size_t a = 0; a < voc.predArity(f.pred); ++a)
                f.args.push_back(pool[rng() % pool.size()]);
            delta.insertions.push_back(f);
        }
    }
    return delta;
}

// ---------------------------------------------------------------------------
// Rematerialisation oracle

struct VerifyReport {
    bool pass = true;
    std::vector<std::string> missing;           // facts the oracle has and the state lacks
    std::vector<std::string> extra;             // facts the state has and the oracle lacks
    std::vector<std::string> explicitMismatch;  // explicit set differs from (E\E−)∪E+
    std::vector<std::string> counterMismatch;

    std::string summary() const {
        if (pass)
            return "PASS";
        std::string s = "FAIL";
        auto add = [&](const char* what, const std::vector<std::string>& v) {
            for (const std::string& f : v)
                s += std::string("\n") + what + " " + f;
        };
        add("missing", missing);
        add("extra", extra);
        add("explicit", explicitMismatch);
        add("counter", counterMismatch);
        return s;
    }
};

// Rebuilds the materialisation from scratch on the post-update explicit facts
// and compares it (and, on request, the counters) with the maintained state.
inline VerifyReport verifyUpdate(EngineState& result, const std::vector<GroundFact>& oldE,
                                 const ParsedDelta& delta, bool checkCnr = false,
                                 bool checkCr = false) {
    VerifyReport report;
    const Vocabulary& voc = result.voc();

    std::unordered_set<GroundFact, GroundFactHash> newE(oldE.begin(), oldE.end());
    for (const GroundFact& f : delta.deletions)
        newE.erase(f);
    for (const GroundFact& f : delta.insertions)
        newE.insert(f);

    std::vector<GroundFact> newEVec(newE.begin(), newE.end());
    EngineState oracle = materialise(result.program, newEVec, CounterMode::Both);

    // Explicit facts must equal (E \ E−) ∪ E+.
    result.explicitFacts.forEachLive([&](FactId id) {
        if (!newE.count(result.registry.fact(id)))
            report.explicitMismatch.push_back("unexpected " + renderFact(voc, result.registry.fact(id)));
    });
    for (const GroundFact& f : newE) {
        FactId id = result.registry.lookup(f);
        if (id == kNoFact || !result.explicitFacts.contains(id))
            report.explicitMismatch.push_back("absent " + renderFact(voc, f));
    }

    oracle.facts.forEachLive([&](FactId oid) {
        const GroundFact& f = oracle.registry.fact(oid);
        FactId id = result.registry.lookup(f);
        if (id == kNoFact || !result.facts.contains(id))
            report.missing.push_back(renderFact(voc, f));
    });
    result.facts.forEachLive([&](FactId id) {
        const GroundFact& f = result.registry.fact(id);
        FactId oid = oracle.registry.lookup(f);
        if (oid == kNoFact || !oracle.facts.contains(oid))
            report.extra.push_back(renderFact(voc, f));
    });

    if (checkCnr || checkCr) {
        for (FactId id = 0; id < result.registry.size(); ++id) {
            const GroundFact& f = result.registry.fact(id);
            FactId oid = oracle.registry.lookup(f);
            Counters want = oid == kNoFact ? Counters{} : oracle.counters.get(oid);
            if (oid != kNoFact && !oracle.facts.contains(oid))
                want = Counters{};
            Counters got = result.counters.get(id);
            if ((checkCnr && got.nonrecursive != want.nonrecursive) ||
                (checkCr && got.recursive != want.recursive))
                report.counterMismatch.push_back(
                    renderFact(voc, f) + " got (" + std::to_string(got.nonrecursive) + "," +
                    std::to_string(got.recursive) + ") want (" + std::to_string(want.nonrecursive) +
                    "," + std::to_string(want.recursive) + ")");
        }
    }

    std::sort(report.missing.begin(), report.missing.end());
    std::sort(report.extra.begin(), report.extra.end());
    std::sort(report.explicitMismatch.begin(), report.explicitMismatch.end());
    std::sort(report.counterMismatch.begin(), report.counterMismatch.end());
    report.pass = report.missing.empty() && report.extra.empty() &&
                  report.explicitMismatch.empty() && report.counterMismatch.empty();
    return report;
}

inline std::vector<std::string> renderSortedFacts(const EngineState& state) {
    std::vector<std::string> out;
    state.facts.forEachLive(
        [&](FactId id) { out.push_back(renderFact(state.voc(), state.registry.fact(id))); });
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Benchmark suites (CSV)

namespace detail {

inline std::string benchHeader() {
    return "suite,generator,param,seed,algo,verified,instances,backward_candidates,deleted,added,"
           "wall_ms\n";
}

inline void benchRow(std::string& csv, const std::string& suite, const std::string& gen,
                     const std::string& param, std::uint64_t seed, const LoadedInstance& inst,
                     const ParsedDelta& delta, Algo algo) {
    EngineState state = materialise(inst.program, inst.facts, CounterMode::Both);
    UpdateStats stats = applyUpdate(state, algo, delta);
    VerifyReport report = verifyUpdate(state, inst.facts, delta);
    PhaseStats t = stats.totals();
    char wall[64];
    std::snprintf(wall, sizeof wall, "%.3f", t.wallMs);
    csv += suite + "," + gen + "," + param + "," + std::to_string(seed) + "," + algoName(algo) +
           "," + (report.pass ? "yes" : "no") + "," + std::to_string(t.instances) + "," +
           std::to_string(t.backwardCandidates) + "," + std::to_string(t.deleted) + "," +
           std::to_string(t.added) + "," + wall + "\n";
}

}  // namespace detail

// Quadratic-vs-constant rederivation scaling on the two join benchmarks, plus
// random-deletion runs on the DAG path instance; all four algorithms.
inline std::string benchScaling() {
    std::string csv = detail::benchHeader();
    const Algo algos[] = {Algo::Dred, Algo::Dredc, Algo::Bf, Algo::Bfc};
    for (std::uint32_t n : {50u, 100u, 200u}) {
        {
            LoadedInstance inst = loadInstance(genExample1(n));
            ParsedDelta delta;
            for (const GroundFact& f : inst.facts)
                if (inst.voc->renderConst(f.args[1])[0] == 'c')
                    delta.deletions.push_back(f);
            for (Algo a : algos)
                detail::benchRow(csv, "scaling", "ex1", std::to_string(n), 0, inst, delta, a);
        }
        {
            LoadedInstance inst = loadInstance(genExample2(n));
            ParsedDelta delta;
            delta.deletions.push_back(inst.facts.front());  // B(a,b1,1)
            for (Algo a : algos)
                detail::benchRow(csv, "scaling", "ex2", std::to_string(n), 0, inst, delta, a);
        }
    }
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        LoadedInstance inst = loadInstance(genSspe(1000, 10000, seed));
        ParsedDelta delta = randomDelete(inst.facts, 100, seed);
        for (Algo a : algos)
            detail::benchRow(csv, "scaling", "sspe", "1000x10000", seed, inst, delta, a);
    }
    return csv;
}

// Randomised differential runs against the rematerialisation oracle.
inline std::string benchFuzz() {
    std::string csv = detail::benchHeader();
    const Algo algos[] = {Algo::Dred, Algo::Dredc, Algo::Bf, Algo::Bfc};
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        RandomSpec spec;
        spec.seed = seed;
        LoadedInstance inst = loadInstance(genRandom(spec));
        ParsedDelta delta =
            randomUpdate(*inst.voc, inst.facts, inst.facts.size() / 5, inst.facts.size() / 10, seed);
        for (Algo a : algos)
            detail::benchRow(csv, "fuzz", "random", "default", seed, inst, delta, a);
    }
    return csv;
}

}  // namespace dlivm

#endif
