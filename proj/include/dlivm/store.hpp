#ifndef DLIVM_STORE_HPP
#define DLIVM_STORE_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "dlivm/parser.hpp"

namespace dlivm {

using FactId = std::uint32_t;
inline constexpr FactId kNoFact = std::numeric_limits<FactId>::max();

// Interns ground facts to dense ids. Append-only: a fact keeps its id even
// after it is deleted from every set, so working sets and counters are plain
// id-keyed containers.
class FactRegistry {
public:
    FactId intern(const GroundFact& f) {
        auto it = ids_.find(f);
        if (it != ids_.end())
            return it->second;
        FactId id = static_cast<FactId>(facts_.size());
        facts_.push_back(f);
        ids_.emplace(facts_.back(), id);
        return id;
    }

    FactId lookup(const GroundFact& f) const {
        auto it = ids_.find(f);
        return it == ids_.end() ? kNoFact : it->second;
    }

    const GroundFact& fact(FactId id) const { return facts_[id]; }
    std::size_t size() const { return facts_.size(); }

private:
    std::vector<GroundFact> facts_;
    std::unordered_map<GroundFact, FactId, GroundFactHash> ids_;
};

// Membership + deterministic insertion-order iteration; no per-position index.
class FactIdSet {
public:
    bool contains(FactId id) const { return id < member_.size() && member_[id]; }

    bool insert(FactId id) {
        if (contains(id))
            return false;
        if (id >= member_.size())
            member_.resize(id + 1, 0);
        member_[id] = 1;
        order_.push_back(id);
        return true;
    }

    const std::vector<FactId>& order() const { return order_; }
    std::size_t size() const { return order_.size(); }
    bool empty() const { return order_.empty(); }
    void clear() {
        member_.clear();
        order_.clear();
    }

private:
    std::vector<std::uint8_t> member_;
    std::vector<FactId> order_;
};

// Indexed fact collection: per-predicate insertion-order list plus one index
// per argument position. Erase only clears the membership flag; index entries
// are filtered by liveness on scan.
class FactSet {
public:
    bool contains(FactId id) const { return id < member_.size() && member_[id]; }

    bool insert(FactId id, const FactRegistry& reg) {
        if (contains(id))
            return false;
        if (id >= member_.size()) {
            member_.resize(id + 1, 0);
            indexed_.resize(id + 1, 0);
        }
        member_[id] = 1;
        ++size_;
        if (!indexed_[id]) {
            indexed_[id] = 1;
            const GroundFact& f = reg.fact(id);
            if (f.pred >= preds_.size())
                preds_.resize(f.pred + 1);
            PredData& pd = preds_[f.pred];
            if (pd.byPos.empty())
                pd.byPos.resize(f.args.size());
            pd.order.push_back(id);
            for (std::size_t p = 0; p < f.args.size(); ++p)
                pd.byPos[p][f.args[p]].push_back(id);
        }
        return true;
    }

    bool erase(FactId id) {
        if (!contains(id))
            return false;
        member_[id] = 0;
        --size_;
        return true;
    }

    std::size_t size() const { return size_; }

    // Live facts of a predicate, insertion order.
    void forEach(PredId pred, const std::function<void(FactId)>& cb) const {
        if (pred >= preds_.size())
            return;
        for (FactId id : preds_[pred].order)
            if (member_[id])
                cb(id);
    }

    void forEachLive(const std::function<void(FactId)>& cb) const {
        for (PredId p = 0; p < preds_.size(); ++p)
            forEach(p, cb);
    }

    const std::vector<FactId>* bucket(PredId pred, std::size_t pos, ConstId c) const {
        if (pred >= preds_.size())
            return nullptr;
        const PredData& pd = preds_[pred];
        if (pos >= pd.byPos.size())
            return nullptr;
        auto it = pd.byPos[pos].find(c);
        return it == pd.byPos[pos].end() ? nullptr : &it->second;
    }

    std::size_t bucketSize(PredId pred, std::size_t pos, ConstId c) const {
        const auto* b = bucket(pred, pos, c);
        return b ? b->size() : 0;
    }

    std::size_t predFactCount(PredId pred) const {
        return pred < preds_.size() ? preds_[pred].order.size() : 0;
    }

    // Number of distinct keys ever seen at (pred, pos); selectivity estimate.
    std::size_t distinctKeys(PredId pred, std::size_t pos) const {
        if (pred >= preds_.size() || pos >= preds_[pred].byPos.size())
            return 0;
        return preds_[pred].byPos[pos].size();
    }

private:
    struct PredData {
        std::vector<FactId> order;
        std::vector<std::unordered_map<ConstId, std::vector<FactId>>> byPos;
    };

    std::vector<std::uint8_t> member_;
    std::vector<std::uint8_t> indexed_;  // ever appended to order/buckets
    std::size_t size_ = 0;
    std::vector<PredData> preds_;
};

// A lazily evaluated composition like "I \ (D \ A)" or "(I \ D) ∪ A": up to
// two enumeration sources plus a membership predicate over the composition.
// Never materialised; Algorithms 1-3 reference six such views per update.
struct FactView {
    const FactSet* enum1 = nullptr;
    const FactSet* enum2 = nullptr;  // deduped against enum1 membership
    std::function<bool(FactId)> member;

    bool contains(FactId id) const { return member(id); }
};

inline FactView viewOf(const FactSet& base) {
    return {&base, nullptr, [&base](FactId f) { return base.contains(f); }};
}

struct Counters {
    std::uint64_t nonrecursive = 0;  // includes explicit membership
    std::uint64_t recursive = 0;

    friend bool operator==(const Counters&, const Counters&) = default;
};

enum class CounterMode : std::uint8_t { None, NonrecursiveOnly, Both };

// Fact -> (Cnr, Cr); absent means (0, 0).
class CounterMap {
public:
    Counters get(FactId id) const { return id < data_.size() ? data_[id] : Counters{}; }

    void incNonrecursive(FactId id) {
        Counters& c = bump(id);
        c.nonrecursive = checkedInc(c.nonrecursive);
    }
    void incRecursive(FactId id) {
        Counters& c = bump(id);
        c.recursive = checkedInc(c.recursive);
    }

    void decNonrecursive(FactId id, const FactRegistry& reg, const Vocabulary& voc) {
        Counters& c = bump(id);
        if (c.nonrecursive == 0)
            throw CounterUnderflow(renderFact(voc, reg.fact(id)));
        --c.nonrecursive;
    }

    void decRecursive(FactId id, const FactRegistry& reg, const Vocabulary& voc) {
        Counters& c = bump(id);
        if (c.recursive == 0)
            throw CounterUnderflow(renderFact(voc, reg.fact(id)));
        --c.recursive;
    }

    void set(FactId id, Counters c) { bump(id) = c; }
    void clear() { data_.clear(); }

    bool equal(const CounterMap& other, std::size_t upTo, bool compareRecursive) const {
        for (FactId id = 0; id < upTo; ++id) {
            Counters a = get(id), b = other.get(id);
            if (a.nonrecursive != b.nonrecursive)
                return false;
            if (compareRecursive && a.recursive != b.recursive)
                return false;
        }
        return true;
    }

private:
    Counters& bump(FactId id) {
        if (id >= data_.size())
            data_.resize(id + 1);
        return data_[id];
    }
    Counters& at(FactId id) { return data_[id]; }

    static std::uint64_t checkedInc(std::uint64_t v) {
        if (v == std::numeric_limits<std::uint64_t>::max())
            throw CounterOverflow();
        return v + 1;
    }

    std::vector<Counters> data_;
};

}  // namespace dlivm

#endif
