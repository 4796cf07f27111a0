#ifndef DLIVM_STRATIFY_HPP
#define DLIVM_STRATIFY_HPP

#include <algorithm>
#include <cstdint>
#include <vector>

#include "dlivm/model.hpp"

namespace dlivm {

// Finest stratification: one stratum per strongly connected component of the
// predicate dependency graph, numbered in topological order. Predicates that
// occur in no rule (data-only) default to stratum 1.
struct Stratification {
    std::vector<std::uint32_t> lambda;  // by PredId; 0 = not mentioned by rules
    std::uint32_t strataCount = 0;

    struct Stratum {
        std::vector<std::uint32_t> nonrecursive;  // rule indices
        std::vector<std::uint32_t> recursive;
    };
    std::vector<Stratum> strata;              // index s-1
    std::vector<bool> ruleRecursive;          // by rule index
    std::vector<std::uint32_t> ruleStratum;   // by rule index

    std::uint32_t stratumOf(PredId p) const {
        if (p < lambda.size() && lambda[p] != 0)
            return lambda[p];
        return 1;
    }
};

namespace detail {

struct SccState {
    std::vector<std::vector<PredId>> pos;  // head -> positive body preds
    std::vector<std::vector<PredId>> neg;  // head -> negative body preds
    std::vector<int> index, low;
    std::vector<bool> onStack;
    std::vector<PredId> stack;
    std::vector<std::uint32_t> comp;  // component number in emission order, 1-based
    int next = 0;
    std::uint32_t comps = 0;

    void strongconnect(PredId v) {
        index[v] = low[v] = next++;
        stack.push_back(v);
        onStack[v] = true;
        auto visit = [&](PredId w) {
            if (index[w] < 0) {
                strongconnect(w);
                low[v] = std::min(low[v], low[w]);
            } else if (onStack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        };
        for (PredId w : pos[v])
            visit(w);
        for (PredId w : neg[v])
            visit(w);
        if (low[v] == index[v]) {
            ++comps;
            PredId w;
            do {
                w = stack.back();
                stack.pop_back();
                onStack[w] = false;
                comp[w] = comps;
            } while (w != v);
        }
    }
};

}  // namespace detail

inline Stratification stratify(const Vocabulary& voc, const Program& program) {
    for (const Rule& r : program.rules)
        checkSafety(voc, r);

    std::size_t n = voc.predCount();
    detail::SccState scc;
    scc.pos.resize(n);
    scc.neg.resize(n);
    scc.index.assign(n, -1);
    scc.low.assign(n, 0);
    scc.onStack.assign(n, false);
    scc.comp.assign(n, 0);
    std::vector<bool> mentioned(n, false);
    for (const Rule& r : program.rules) {
        mentioned[r.head.pred] = true;
        for (const Atom& a : r.positiveBody) {
            mentioned[a.pred] = true;
            scc.pos[r.head.pred].push_back(a.pred);
        }
        for (const Atom& a : r.negativeBody) {
            mentioned[a.pred] = true;
            scc.neg[r.head.pred].push_back(a.pred);
        }
    }
    // Edges point head -> body, so Tarjan emits dependency-free components
    // first and the emission order is a topological order of strata. Data-only
    // predicates are left out (λ 0) and default to stratum 1.
    for (PredId p = 0; p < n; ++p)
        if (mentioned[p] && scc.index[p] < 0)
            scc.strongconnect(p);

    Stratification out;
    out.lambda.assign(n, 0);
    for (PredId p = 0; p < n; ++p)
        out.lambda[p] = scc.comp[p];
    out.strataCount = scc.comps;
    out.strata.resize(out.strataCount);
    out.ruleRecursive.resize(program.rules.size());
    out.ruleStratum.resize(program.rules.size());

    for (std::size_t i = 0; i < program.rules.size(); ++i) {
        const Rule& r = program.rules[i];
        std::uint32_t hs = out.lambda[r.head.pred];
        for (const Atom& a : r.negativeBody)
            if (out.lambda[a.pred] >= hs)
                throw NotStratifiableError("negative dependency of " + voc.predName(r.head.pred) +
                                           " on " + voc.predName(a.pred) + " lies on a cycle");
        bool rec = false;
        for (const Atom& a : r.positiveBody)
            rec = rec || out.lambda[a.pred] == hs;
        out.ruleRecursive[i] = rec;
        out.ruleStratum[i] = hs;
        auto& stratum = out.strata[hs - 1];
        (rec ? stratum.recursive : stratum.nonrecursive).push_back(static_cast<std::uint32_t>(i));
    }
    return out;
}

}  // namespace dlivm

#endif
