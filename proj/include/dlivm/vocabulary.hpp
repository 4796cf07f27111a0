#ifndef DLIVM_VOCABULARY_HPP
#define DLIVM_VOCABULARY_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dlivm/errors.hpp"

namespace dlivm {

using StringId = std::uint32_t;
using ConstId = std::uint32_t;
using PredId = std::uint32_t;
using VarId = std::uint32_t;

enum class ConstKind : std::uint8_t { Symbol, Int, String };

struct ConstInfo {
    ConstKind kind;
    StringId text = 0;     // Symbol / String payload
    std::int64_t value = 0;  // Int payload
};

// Interns every name and constant of a program/dataset pair so equality is an
// integer comparison everywhere else. Append-only; shared between the program,
// its fact sets, and any deltas applied later.
class Vocabulary {
public:
    StringId internString(std::string_view s) {
        auto it = stringIds_.find(std::string(s));
        if (it != stringIds_.end())
            return it->second;
        StringId id = static_cast<StringId>(strings_.size());
        strings_.emplace_back(s);
        stringIds_.emplace(strings_.back(), id);
        return id;
    }

    const std::string& string(StringId id) const { return strings_[id]; }

    ConstId symbolConst(std::string_view name) {
        return internConst({ConstKind::Symbol, internString(name), 0});
    }

    ConstId stringConst(std::string_view text) {
        return internConst({ConstKind::String, internString(text), 0});
    }

    ConstId intConst(std::int64_t value) {
        auto it = intConsts_.find(value);
        if (it != intConsts_.end())
            return it->second;
        ConstId id = static_cast<ConstId>(consts_.size());
        consts_.push_back({ConstKind::Int, 0, value});
        intConsts_.emplace(value, id);
        return id;
    }

    const ConstInfo& constInfo(ConstId id) const { return consts_[id]; }

    std::string renderConst(ConstId id) const {
        const ConstInfo& c = consts_[id];
        switch (c.kind) {
            case ConstKind::Symbol: return string(c.text);
            case ConstKind::Int: return std::to_string(c.value);
            case ConstKind::String: return '"' + string(c.text) + '"';
        }
        return {};
    }

    // Registers the predicate with a fixed arity; arity is checked on every
    // later use of the same name.
    PredId pred(std::string_view name, std::size_t arity) {
        auto it = predIds_.find(std::string(name));
        if (it != predIds_.end()) {
            if (predArity_[it->second] != arity)
                throw ArityError("predicate " + std::string(name) + " used with arity " +
                                 std::to_string(arity) + " but declared with arity " +
                                 std::to_string(predArity_[it->second]));
            return it->second;
        }
        PredId id = static_cast<PredId>(predNames_.size());
        predNames_.emplace_back(name);
        predArity_.push_back(arity);
        predIds_.emplace(predNames_.back(), id);
        return id;
    }

    const std::string& predName(PredId id) const { return predNames_[id]; }
    std::size_t predArity(PredId id) const { return predArity_[id]; }
    std::size_t predCount() const { return predNames_.size(); }

    VarId var(std::string_view name) { return internString(name); }
    const std::string& varName(VarId id) const { return string(id); }

private:
    ConstId internConst(const ConstInfo& info) {
        // Symbol/String payloads are interned strings, so (kind, text) is a key.
        std::uint64_t key = (static_cast<std::uint64_t>(info.kind) << 32) | info.text;
        auto it = namedConsts_.find(key);
        if (it != namedConsts_.end())
            return it->second;
        ConstId id = static_cast<ConstId>(consts_.size());
        consts_.push_back(info);
        namedConsts_.emplace(key, id);
        return id;
    }

    std::vector<std::string> strings_;
    std::unordered_map<std::string, StringId> stringIds_;
    std::vector<ConstInfo> consts_;
    std::unordered_map<std::uint64_t, ConstId> namedConsts_;
    std::unordered_map<std::int64_t, ConstId> intConsts_;
    std::vector<std::string> predNames_;
    std::vector<std::size_t> predArity_;
    std::unordered_map<std::string, PredId> predIds_;
};

}  // namespace dlivm

#endif
