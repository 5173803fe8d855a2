#include "wsc/core.hpp"

#include <algorithm>
#include <iterator>
#include <map>
#include <mutex>
#include <queue>

namespace wsc {

ParamSet make_param_set(std::vector<ParameterId> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

bool contains(const ParamSet& set, ParameterId id) {
    return std::binary_search(set.begin(), set.end(), id);
}

bool is_subset(const ParamSet& sub, const ParamSet& super) {
    return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

ParamSet set_union(const ParamSet& a, const ParamSet& b) {
    ParamSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

ParamSet set_difference(const ParamSet& a, const ParamSet& b) {
    ParamSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

ParamSet set_intersection(const ParamSet& a, const ParamSet& b) {
    ParamSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

ParameterId ParameterRegistry::intern(std::string_view name) {
    if (name.empty()) throw std::invalid_argument("parameter name must be nonempty");
    {
        std::shared_lock lock(mutex_);
        if (auto it = ids_.find(std::string(name)); it != ids_.end()) return it->second;
    }
    std::unique_lock lock(mutex_);
    auto [it, inserted] = ids_.try_emplace(std::string(name), ParameterId{0});
    if (inserted) {
        it->second = ParameterId{static_cast<std::uint32_t>(names_.size())};
        names_.emplace_back(name);
    }
    return it->second;
}

std::optional<ParameterId> ParameterRegistry::find(std::string_view name) const {
    std::shared_lock lock(mutex_);
    if (auto it = ids_.find(std::string(name)); it != ids_.end()) return it->second;
    return std::nullopt;
}

const std::string& ParameterRegistry::name(ParameterId id) const {
    std::shared_lock lock(mutex_);
    return names_.at(id.value);
}

std::size_t ParameterRegistry::size() const {
    std::shared_lock lock(mutex_);
    return names_.size();
}

Repository::Repository(std::vector<Service> services) {
    for (auto& s : services) add(std::move(s));
}

void Repository::add(Service service) {
    if (service.name.empty()) throw std::invalid_argument("service name must be nonempty");
    if (by_name_.contains(service.name))
        throw DuplicateServiceError("duplicate service name: " + service.name);
    service.inputs = make_param_set(std::move(service.inputs));
    service.outputs = make_param_set(std::move(service.outputs));
    if (!set_intersection(service.inputs, service.outputs).empty())
        throw std::invalid_argument("service " + service.name + " lists a parameter as both input and output");
    for (const auto& set : {&service.inputs, &service.outputs})
        if (!set->empty()) param_bound_ = std::max<std::size_t>(param_bound_, set->back().value + 1);
    by_name_.emplace(service.name, services_.size());
    services_.push_back(std::move(service));
}

const Service* Repository::find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    return it == by_name_.end() ? nullptr : &services_[it->second];
}

const Service& Repository::at(std::string_view name) const {
    if (const Service* s = find(name)) return *s;
    throw UnknownServiceError("unknown service: " + std::string(name));
}

std::optional<std::size_t> Repository::index_of(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::size_t param_bound(const Request& req) {
    std::size_t bound = 0;
    for (const auto& set : {&req.init, &req.goal})
        if (!set->empty()) bound = std::max<std::size_t>(bound, set->back().value + 1);
    return bound;
}

ValidationReport validate_sequence(std::span<const Service* const> calls, const Request& req,
                                   std::span<const std::size_t> layer_sizes) {
    std::size_t bound = param_bound(req);
    for (const Service* s : calls) {
        for (const auto& set : {&s->inputs, &s->outputs})
            if (!set->empty()) bound = std::max<std::size_t>(bound, set->back().value + 1);
    }
    std::vector<char> known(bound, 0);
    for (auto p : req.init) known[p.value] = 1;

    ValidationReport report;
    auto check_inputs = [&](std::size_t pos) {
        if (report.first_violation) return;
        ParamSet missing;
        for (auto p : calls[pos]->inputs)
            if (!known[p.value]) missing.push_back(p);
        if (!missing.empty()) report.first_violation = Violation{pos + 1, std::move(missing)};
    };

    if (layer_sizes.empty()) {
        for (std::size_t i = 0; i < calls.size(); ++i) {
            check_inputs(i);
            for (auto p : calls[i]->outputs) known[p.value] = 1;
        }
    } else {
        std::size_t pos = 0;
        for (std::size_t size : layer_sizes) {
            for (std::size_t i = pos; i < pos + size; ++i) check_inputs(i);
            for (std::size_t i = pos; i < pos + size; ++i)
                for (auto p : calls[i]->outputs) known[p.value] = 1;
            pos += size;
        }
    }

    for (auto g : req.goal)
        if (!known[g.value]) report.missing_goal.push_back(g);
    report.goal_covered = report.missing_goal.empty();
    report.valid = report.goal_covered && !report.first_violation;
    return report;
}

std::vector<const Service*> resolve_calls(const Repository& repo,
                                          const std::vector<std::string>& calls) {
    std::vector<const Service*> out;
    out.reserve(calls.size());
    for (const auto& name : calls) out.push_back(&repo.at(name));
    return out;
}

ValidationReport validate_composition(const Repository& repo, const Request& req,
                                      const Composition& comp) {
    auto resolved = resolve_calls(repo, comp.calls);
    std::vector<std::size_t> sizes;
    if (comp.layers) {
        std::vector<std::string> flat;
        for (const auto& layer : *comp.layers) {
            sizes.push_back(layer.size());
            flat.insert(flat.end(), layer.begin(), layer.end());
        }
        if (flat != comp.calls)
            throw std::invalid_argument("composition layers do not concatenate to calls");
    }
    return validate_sequence(resolved, req, sizes);
}

namespace {

using KnownBits = std::vector<std::uint64_t>;

void set_bit(KnownBits& bits, std::uint32_t i) { bits[i / 64] |= std::uint64_t{1} << (i % 64); }
bool test_bit(const KnownBits& bits, std::uint32_t i) { return (bits[i / 64] >> (i % 64)) & 1U; }

}  // namespace

std::optional<Composition> brute_force_shortest(const Repository& repo, const Request& req,
                                                 std::size_t max_len) {
    std::size_t bound = std::max(repo.param_bound(), param_bound(req));
    std::size_t words = bound / 64 + 1;
    auto covers = [](const KnownBits& bits, const ParamSet& set) {
        return std::all_of(set.begin(), set.end(), [&](ParameterId p) { return test_bit(bits, p.value); });
    };

    KnownBits start(words, 0);
    for (auto p : req.init) set_bit(start, p.value);
    if (covers(start, req.goal)) return Composition{};

    struct Node {
        KnownBits bits;
        std::size_t parent;
        std::size_t service;
        std::size_t depth;
    };
    std::vector<Node> nodes{{start, 0, 0, 0}};
    std::map<KnownBits, std::size_t> seen{{start, 0}};
    std::queue<std::size_t> frontier;
    frontier.push(0);

    auto services = repo.services();
    while (!frontier.empty()) {
        std::size_t cur = frontier.front();
        frontier.pop();
        if (nodes[cur].depth >= max_len) continue;
        for (std::size_t s = 0; s < services.size(); ++s) {
            const KnownBits& bits = nodes[cur].bits;
            if (!covers(bits, services[s].inputs) || covers(bits, services[s].outputs)) continue;
            KnownBits next = bits;
            for (auto p : services[s].outputs) set_bit(next, p.value);
            if (seen.contains(next)) continue;
            std::size_t id = nodes.size();
            nodes.push_back({next, cur, s, nodes[cur].depth + 1});
            seen.emplace(std::move(next), id);
            if (covers(nodes[id].bits, req.goal)) {
                Composition comp;
                for (std::size_t n = id; n != 0; n = nodes[n].parent)
                    comp.calls.push_back(services[nodes[n].service].name);
                std::reverse(comp.calls.begin(), comp.calls.end());
                return comp;
            }
            frontier.push(id);
        }
    }
    return std::nullopt;
}

}  // namespace wsc
