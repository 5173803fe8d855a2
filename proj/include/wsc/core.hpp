#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wsc {

// Dense id of an interned parameter name. Ids are assigned in first-seen order.
struct ParameterId {
    std::uint32_t value = 0;
    friend auto operator<=>(ParameterId, ParameterId) = default;
};

// Sorted, duplicate-free list of parameter ids.
using ParamSet = std::vector<ParameterId>;

ParamSet make_param_set(std::vector<ParameterId> ids);
bool contains(const ParamSet& set, ParameterId id);
bool is_subset(const ParamSet& sub, const ParamSet& super);
ParamSet set_union(const ParamSet& a, const ParamSet& b);
ParamSet set_difference(const ParamSet& a, const ParamSet& b);
ParamSet set_intersection(const ParamSet& a, const ParamSet& b);

// Thread-safe name <-> id table. Safe for concurrent interning.
class ParameterRegistry {
public:
    ParameterId intern(std::string_view name);
    std::optional<ParameterId> find(std::string_view name) const;
    const std::string& name(ParameterId id) const;
    std::size_t size() const;

private:
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, ParameterId> ids_;
    std::deque<std::string> names_;  // deque keeps references stable on growth
};

struct Service {
    std::string name;
    ParamSet inputs;
    ParamSet outputs;
};

class DuplicateServiceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownServiceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Immutable after loading; lookup by name is O(1).
class Repository {
public:
    Repository() = default;
    explicit Repository(std::vector<Service> services);

    void add(Service service);
    const Service* find(std::string_view name) const;
    const Service& at(std::string_view name) const;
    std::span<const Service> services() const { return services_; }
    std::size_t size() const { return services_.size(); }
    std::optional<std::size_t> index_of(std::string_view name) const;

    // One past the largest parameter id used by any service.
    std::size_t param_bound() const { return param_bound_; }

private:
    std::vector<Service> services_;
    std::unordered_map<std::string, std::size_t> by_name_;
    std::size_t param_bound_ = 0;
};

struct Request {
    ParamSet init;
    ParamSet goal;
};

struct Composition {
    std::vector<std::string> calls;
    std::optional<std::vector<std::vector<std::string>>> layers;

    std::size_t length() const { return calls.size(); }
    friend bool operator==(const Composition&, const Composition&) = default;
};

struct Violation {
    std::size_t position = 0;  // 1-based; position 0 is the implicit Init call
    ParamSet missing;
};

struct ValidationReport {
    bool valid = false;
    std::optional<Violation> first_violation;
    bool goal_covered = false;
    ParamSet missing_goal;
};

// Checks a call sequence. When layer_sizes is non-empty, inputs may only use
// outputs from strictly earlier layers.
ValidationReport validate_sequence(std::span<const Service* const> calls, const Request& req,
                                   std::span<const std::size_t> layer_sizes = {});

// Throws UnknownServiceError for names missing from repo, std::invalid_argument
// when layers do not concatenate to calls.
ValidationReport validate_composition(const Repository& repo, const Request& req,
                                      const Composition& comp);

std::vector<const Service*> resolve_calls(const Repository& repo,
                                          const std::vector<std::string>& calls);

// Exact shortest composition by breadth-first search over known-parameter sets.
// Exponential; meant for repositories of a dozen services.
std::optional<Composition> brute_force_shortest(const Repository& repo, const Request& req,
                                                 std::size_t max_len);

std::size_t param_bound(const Request& req);

}  // namespace wsc

template <>
struct std::hash<wsc::ParameterId> {
    std::size_t operator()(wsc::ParameterId id) const noexcept { return id.value; }
};
