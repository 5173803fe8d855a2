#include "wsc/name_engine.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <queue>

namespace wsc {

ScoreTable compute_scores(std::span<const Service> services, const ParamSet& goal,
                          std::size_t bound) {
    for (const auto& s : services)
        for (const auto& set : {&s.inputs, &s.outputs})
            if (!set->empty()) bound = std::max<std::size_t>(bound, set->back().value + 1);
    if (!goal.empty()) bound = std::max<std::size_t>(bound, goal.back().value + 1);

    ScoreTable table;
    table.param_score.assign(bound, 0.0);
    table.service_score.assign(services.size(), 0.0);

    std::vector<std::vector<std::size_t>> producers(bound);
    for (std::size_t s = 0; s < services.size(); ++s)
        for (auto p : services[s].outputs) producers[p.value].push_back(s);
    for (auto& list : producers)
        std::sort(list.begin(), list.end(),
                  [&](std::size_t a, std::size_t b) { return services[a].name < services[b].name; });

    std::vector<char> enqueued(services.size(), 0);
    std::vector<std::size_t> processed;
    std::deque<std::size_t> queue;
    auto enqueue_producers = [&](ParameterId p) {
        for (std::size_t s : producers[p.value]) {
            if (enqueued[s]) continue;
            enqueued[s] = 1;
            queue.push_back(s);
        }
    };
    auto output_sum = [&](const Service& s) {
        double sum = 0.0;
        for (auto p : s.outputs) sum += table.param_score[p.value];
        return sum;
    };

    for (auto g : goal) table.param_score[g.value] = kGoalSeedScore;
    for (auto g : goal) enqueue_producers(g);

    while (!queue.empty()) {
        std::size_t s = queue.front();
        queue.pop_front();
        processed.push_back(s);
        const Service& svc = services[s];
        double score = output_sum(svc);
        table.service_score[s] = score;
        if (svc.inputs.empty()) continue;
        double share = score / static_cast<double>(svc.inputs.size());
        for (auto p : svc.inputs) {
            table.param_score[p.value] += share;
            enqueue_producers(p);
        }
    }
    for (std::size_t s : processed) table.service_score[s] = output_sum(services[s]);
    return table;
}

ScoreTable compute_scores(const Repository& repo, const Request& req) {
    return compute_scores(repo.services(), req.goal, std::max(repo.param_bound(), param_bound(req)));
}

namespace {

// Selection rank of every service: lower rank is picked first.
std::vector<std::size_t> selection_ranks(const Repository& repo, const Request& req, bool use_scores) {
    auto services = repo.services();
    std::vector<std::size_t> order(services.size());
    std::iota(order.begin(), order.end(), 0);
    if (use_scores) {
        ScoreTable scores = compute_scores(repo, req);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (scores.service_score[a] != scores.service_score[b])
                return scores.service_score[a] > scores.service_score[b];
            return services[a].name < services[b].name;
        });
    } else {
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return services[a].name < services[b].name; });
    }
    std::vector<std::size_t> rank(services.size());
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
    return rank;
}

}  // namespace

std::optional<Composition> find_composition(const Repository& repo, const Request& req,
                                            NameSearchOptions options) {
    auto services = repo.services();
    std::size_t bound = std::max(repo.param_bound(), param_bound(req));
    std::vector<std::size_t> rank = selection_ranks(repo, req, options.use_scores);

    std::vector<std::vector<std::size_t>> input_parameter_of(bound);
    std::vector<std::size_t> unknown_inputs(services.size());
    for (std::size_t s = 0; s < services.size(); ++s) {
        unknown_inputs[s] = services[s].inputs.size();
        for (auto p : services[s].inputs) input_parameter_of[p.value].push_back(s);
    }

    using Entry = std::pair<std::size_t, std::size_t>;  // (rank, service)
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> accessible;
    for (std::size_t s = 0; s < services.size(); ++s)
        if (unknown_inputs[s] == 0) accessible.emplace(rank[s], s);

    std::vector<char> known(bound, 0);
    std::vector<char> in_goal(bound, 0);
    for (auto g : req.goal) in_goal[g.value] = 1;
    std::size_t user_unknown = req.goal.size();

    auto learn = [&](ParameterId p) {
        if (known[p.value]) return;
        known[p.value] = 1;
        if (in_goal[p.value]) --user_unknown;
        for (std::size_t s : input_parameter_of[p.value])
            if (--unknown_inputs[s] == 0) accessible.emplace(rank[s], s);
    };
    for (auto p : req.init) learn(p);

    Composition comp;
    while (user_unknown > 0) {
        if (accessible.empty()) return std::nullopt;
        std::size_t s = accessible.top().second;
        accessible.pop();
        comp.calls.push_back(services[s].name);
        for (auto p : services[s].outputs) learn(p);
    }
    if (options.reduce) comp = reduce_to_fixpoint(repo, req, std::move(comp));
    return comp;
}

std::vector<std::size_t> reduce_sequence(std::span<const Service* const> calls, const Request& req) {
    std::size_t bound = param_bound(req);
    for (const Service* s : calls)
        for (const auto& set : {&s->inputs, &s->outputs})
            if (!set->empty()) bound = std::max<std::size_t>(bound, set->back().value + 1);

    std::vector<std::size_t> future_uses(bound, 0);
    for (const Service* s : calls)
        for (auto p : s->inputs) ++future_uses[p.value];
    for (auto g : req.goal) ++future_uses[g.value];

    std::vector<char> provided(bound, 0);
    for (auto p : req.init) provided[p.value] = 1;

    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < calls.size(); ++i) {
        for (auto p : calls[i]->inputs) --future_uses[p.value];
        bool useful = std::any_of(calls[i]->outputs.begin(), calls[i]->outputs.end(), [&](ParameterId p) {
            return !provided[p.value] && future_uses[p.value] > 0;
        });
        if (!useful) continue;
        kept.push_back(i);
        for (auto p : calls[i]->outputs) provided[p.value] = 1;
    }
    return kept;
}

Composition reduce_composition(const Repository& repo, const Request& req, const Composition& comp) {
    if (!validate_composition(repo, req, comp).valid)
        throw std::invalid_argument("reduce_composition requires a valid composition");
    auto resolved = resolve_calls(repo, comp.calls);
    Composition out;
    for (std::size_t i : reduce_sequence(resolved, req)) out.calls.push_back(comp.calls[i]);
    return out;
}

Composition reduce_to_fixpoint(const Repository& repo, const Request& req, Composition comp) {
    for (std::size_t pass = 0; pass < std::max<std::size_t>(repo.size(), 1); ++pass) {
        Composition next = reduce_composition(repo, req, comp);
        bool unchanged = next.calls.size() == comp.calls.size();
        comp = std::move(next);
        if (unchanged) break;
    }
    return comp;
}

}  // namespace wsc
