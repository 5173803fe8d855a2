#include "wsc/online.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <tuple>

#include "wsc/name_engine.hpp"

namespace wsc {

// ---- snapshot ----

const Service* RepoSnapshot::find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    return it == by_name_.end() ? nullptr : &services_[it->second];
}

std::optional<std::size_t> RepoSnapshot::index_of(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::span<const std::size_t> RepoSnapshot::consumers(ParameterId p) const {
    if (p.value >= input_for_.size()) return {};
    return input_for_[p.value];
}

std::span<const std::size_t> RepoSnapshot::producers(ParameterId p) const {
    if (p.value >= output_for_.size()) return {};
    return output_for_[p.value];
}

void RepoSnapshot::index_service(std::size_t i) {
    const Service& s = services_[i];
    by_name_[s.name] = i;
    for (auto p : s.inputs) {
        if (input_for_.size() <= p.value) input_for_.resize(p.value + 1), output_for_.resize(p.value + 1);
        input_for_[p.value].push_back(i);
    }
    for (auto p : s.outputs) {
        if (output_for_.size() <= p.value) input_for_.resize(p.value + 1), output_for_.resize(p.value + 1);
        output_for_[p.value].push_back(i);
    }
}

void RepoSnapshot::reindex() {
    by_name_.clear();
    for (auto& v : input_for_) v.clear();
    for (auto& v : output_for_) v.clear();
    for (std::size_t i = 0; i < services_.size(); ++i) index_service(i);
}

void RepoSnapshot::add(Service s) {
    if (s.name.empty()) throw std::invalid_argument("service name must be nonempty");
    if (by_name_.contains(s.name)) throw DuplicateServiceError("duplicate service name: " + s.name);
    s.inputs = make_param_set(std::move(s.inputs));
    s.outputs = make_param_set(std::move(s.outputs));
    if (!set_intersection(s.inputs, s.outputs).empty())
        throw std::invalid_argument("service " + s.name + " lists a parameter as both input and output");
    services_.push_back(std::move(s));
    index_service(services_.size() - 1);
    ++version_;
}

void RepoSnapshot::remove(std::string_view name) {
    auto idx = index_of(name);
    if (!idx) throw UnknownServiceError("unknown service: " + std::string(name));
    services_.erase(services_.begin() + static_cast<std::ptrdiff_t>(*idx));
    reindex();
    ++version_;
}

// ---- pure search helpers ----

namespace {

constexpr std::size_t kUnscored = std::numeric_limits<std::size_t>::max();

std::vector<std::size_t> distances(const RepoSnapshot& repo, const OnlineQuery& query) {
    auto services = repo.services();
    std::vector<std::size_t> dist(services.size(), kUnscored);
    std::deque<std::size_t> queue;
    for (auto g : query.required) {
        for (std::size_t s : repo.producers(g)) {
            if (dist[s] != kUnscored) continue;
            dist[s] = 1;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        std::size_t s = queue.front();
        queue.pop_front();
        for (auto p : services[s].inputs) {
            for (std::size_t t : repo.producers(p)) {
                if (dist[t] != kUnscored) continue;
                dist[t] = dist[s] + 1;
                queue.push_back(t);
            }
        }
    }
    return dist;
}

std::vector<std::string> reduce_names(const RepoSnapshot& repo, const OnlineQuery& query,
                                      std::vector<std::string> calls) {
    Request req{query.known, query.required};
    for (std::size_t pass = 0; pass <= repo.services().size(); ++pass) {
        std::vector<const Service*> resolved;
        for (const auto& name : calls) resolved.push_back(repo.find(name));
        auto kept = reduce_sequence(resolved, req);
        if (kept.size() == calls.size()) break;
        std::vector<std::string> next;
        for (std::size_t k : kept) next.push_back(calls[k]);
        calls = std::move(next);
    }
    return calls;
}

bool sequence_valid(const RepoSnapshot& repo, const OnlineQuery& query, const std::vector<std::string>& calls) {
    std::vector<const Service*> resolved;
    for (const auto& name : calls) {
        const Service* s = repo.find(name);
        if (!s) return false;
        resolved.push_back(s);
    }
    return validate_sequence(resolved, Request{query.known, query.required}).valid;
}

}  // namespace

DistanceScore compute_service_scores(const RepoSnapshot& repo, const OnlineQuery& query) {
    auto dist = distances(repo, query);
    DistanceScore out;
    for (std::size_t s = 0; s < dist.size(); ++s)
        if (dist[s] != kUnscored) out.emplace(repo.services()[s].name, dist[s]);
    return out;
}

std::optional<std::vector<std::string>> search_online(const RepoSnapshot& repo, const OnlineQuery& query,
                                                      std::string_view excluded, std::atomic<std::size_t>& searches) {
    ++searches;
    auto services = repo.services();
    auto dist = distances(repo, query);
    auto skip = repo.index_of(excluded);

    std::size_t bound = std::max(repo.param_bound(), param_bound(Request{query.known, query.required}));
    std::vector<char> known(bound, 0);
    std::vector<char> in_goal(bound, 0);
    for (auto g : query.required) in_goal[g.value] = 1;
    std::size_t unknown_goal = query.required.size();

    using Entry = std::pair<std::size_t, std::size_t>;  // (distance, registration position)
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready;
    std::vector<std::size_t> missing(services.size());
    for (std::size_t s = 0; s < services.size(); ++s) {
        missing[s] = services[s].inputs.size();
        if (missing[s] == 0 && s != skip) ready.emplace(dist[s], s);
    }
    auto learn = [&](ParameterId p) {
        if (known[p.value]) return;
        known[p.value] = 1;
        if (in_goal[p.value]) --unknown_goal;
        for (std::size_t s : repo.consumers(p))
            if (--missing[s] == 0 && s != skip) ready.emplace(dist[s], s);
    };
    for (auto p : query.known) learn(p);

    std::vector<std::string> calls;
    while (unknown_goal > 0) {
        if (ready.empty()) return std::nullopt;
        std::size_t s = ready.top().second;
        ready.pop();
        calls.push_back(services[s].name);
        for (auto p : services[s].outputs) learn(p);
    }
    return reduce_names(repo, query, std::move(calls));
}

std::optional<BackupPlan> plan_backup(const RepoSnapshot& repo, const OnlineQuery& query,
                                      const std::vector<std::string>& main, std::size_t position,
                                      std::atomic<std::size_t>& searches) {
    auto service = [&](std::size_t k) -> const Service& {
        const Service* s = repo.find(main.at(k));
        if (!s) throw UnknownServiceError("unknown service: " + main[k]);
        return *s;
    };
    ParamSet known = query.known;
    for (std::size_t k = 0; k < position; ++k) known = set_union(known, service(k).outputs);
    ParamSet required = query.required;
    for (std::size_t k = main.size(); k-- > position + 1;)
        required = set_union(set_difference(required, service(k).outputs), service(k).inputs);

    std::vector<std::string> prefix(main.begin(), main.begin() + static_cast<std::ptrdiff_t>(position));
    const std::string& failed = main[position];

    if (auto repl = search_online(repo, {known, set_difference(required, known)}, failed, searches)) {
        std::vector<std::string> stitched = prefix;
        stitched.insert(stitched.end(), repl->begin(), repl->end());
        stitched.insert(stitched.end(), main.begin() + static_cast<std::ptrdiff_t>(position) + 1, main.end());
        if (sequence_valid(repo, query, stitched))
            return BackupPlan{1, std::move(*repl), reduce_names(repo, query, std::move(stitched))};
    }
    if (auto repl = search_online(repo, {known, set_difference(query.required, known)}, failed, searches)) {
        std::vector<std::string> stitched = prefix;
        stitched.insert(stitched.end(), repl->begin(), repl->end());
        if (sequence_valid(repo, query, stitched))
            return BackupPlan{2, std::move(*repl), reduce_names(repo, query, std::move(stitched))};
    }
    return std::nullopt;
}

// ---- state ----

OnlineState::OnlineState(OnlineOptions options) : options_(options), repo_(std::make_shared<RepoSnapshot>()) {}

OnlineState::~OnlineState() {
    for (auto& p : pending_)
        if (p.result.valid()) p.result.wait();
    for (auto& f : abandoned_)
        if (f.valid()) f.wait();
}

RepoSnapshot& OnlineState::mutable_repo() {
    if (repo_.use_count() > 1) repo_ = std::make_shared<RepoSnapshot>(*repo_);
    return *repo_;
}

const Solution* OnlineState::solution(std::string_view id) const {
    auto it = compositions_.find(std::string(id));
    return it == compositions_.end() ? nullptr : it->second.get();
}

std::vector<std::string> OnlineState::request_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, q] : requests_) out.push_back(id);
    return out;
}

void OnlineState::attach(const Solution& sol) {
    for (const auto& name : sol.main) usages_[name].insert(&sol);
}

void OnlineState::detach(Solution& sol) {
    sol.alive = false;
    for (const auto& name : sol.main) {
        auto it = usages_.find(name);
        if (it == usages_.end()) continue;
        it->second.erase(&sol);
        if (it->second.empty()) usages_.erase(it);
    }
    for (auto& [name, b] : sol.backup) detach(*b);
    sol.backup.clear();
}

DistanceScore OnlineState::compute_service_scores(const OnlineQuery& query) const {
    return wsc::compute_service_scores(*repo_, query);
}

std::optional<std::vector<std::string>> OnlineState::find_composition_online(const OnlineQuery& query) const {
    return search_online(*repo_, query, {}, searches_);
}

std::shared_ptr<Solution> OnlineState::make_backup(Solution& parent, std::size_t position, BackupPlan plan) {
    auto b = std::make_shared<Solution>();
    b->request_id = parent.request_id;
    b->query = parent.query;
    b->main = std::move(plan.replacement);
    b->parent = &parent;
    b->replaces = parent.main.at(position);
    b->type = plan.type;
    b->stitched = std::move(plan.stitched);
    attach(*b);
    return b;
}

std::shared_ptr<Solution> OnlineState::find_backup(Solution& sol, std::string_view service) {
    auto it = std::find(sol.main.begin(), sol.main.end(), service);
    if (it == sol.main.end()) throw std::invalid_argument("service is not part of the composition");
    auto position = static_cast<std::size_t>(it - sol.main.begin());
    auto plan = plan_backup(*repo_, sol.query, sol.main, position, searches_);
    if (!plan) return nullptr;
    return make_backup(sol, position, std::move(*plan));
}

void OnlineState::compute_backups(const std::shared_ptr<Solution>& sol) {
    if (!options_.async_backups) {
        for (std::size_t p = 0; p < sol->main.size(); ++p) {
            auto plan = plan_backup(*repo_, sol->query, sol->main, p, searches_);
            if (plan) sol->backup[sol->main[p]] = make_backup(*sol, p, std::move(*plan));
        }
        return;
    }
    std::shared_ptr<const RepoSnapshot> snapshot = repo_;
    OnlineQuery query = sol->query;
    std::vector<std::string> main = sol->main;
    auto task = [snapshot, query, main, this] {
        std::vector<std::pair<std::size_t, std::optional<BackupPlan>>> out;
        for (std::size_t p = 0; p < main.size(); ++p) out.emplace_back(p, plan_backup(*snapshot, query, main, p, searches_));
        return out;
    };
    pending_.push_back(Pending{sol, snapshot, std::async(std::launch::async, task)});
}

void OnlineState::install(Pending& p) {
    auto plans = p.result.get();
    if (!p.solution->alive || p.snapshot->version() != repo_->version()) return;
    for (auto& [pos, plan] : plans)
        if (plan) p.solution->backup[p.solution->main[pos]] = make_backup(*p.solution, pos, std::move(*plan));
}

void OnlineState::sync_pending(bool deleting) {
    for (auto& p : pending_) {
        if (!p.solution->alive) {
            abandoned_.push_back(std::move(p.result));
            continue;
        }
        if (deleting && p.result.wait_for(std::chrono::seconds(0)) != std::future_status::ready) {
            // Backups not ready: affected requests take the re-solve path.
            abandoned_.push_back(std::move(p.result));
            continue;
        }
        install(p);
    }
    pending_.clear();
}

void OnlineState::finish() { sync_pending(false); }

std::shared_ptr<Solution> OnlineState::solve(const std::string& id, const OnlineQuery& query) {
    auto calls = search_online(*repo_, query, {}, searches_);
    if (!calls) return nullptr;
    auto sol = std::make_shared<Solution>();
    sol->request_id = id;
    sol->query = query;
    sol->main = std::move(*calls);
    attach(*sol);
    compute_backups(sol);
    return sol;
}

std::vector<OnlineEvent> OnlineState::find_composition(const std::string& id, OnlineQuery query) {
    sync_pending(false);
    if (id.empty()) throw std::invalid_argument("request id must be nonempty");
    if (requests_.contains(id)) throw std::invalid_argument("request already registered: " + id);
    query.known = make_param_set(std::move(query.known));
    query.required = make_param_set(std::move(query.required));
    requests_.emplace(id, query);
    auto sol = solve(id, query);
    compositions_[id] = sol;
    if (!sol) return {OnlineEvent{"unsolvable", id, {}, {}, {}}};
    return {OnlineEvent{"solved", id, sol->main, {}, {}}};
}

std::vector<OnlineEvent> OnlineState::register_service(Service ws) {
    sync_pending(false);
    mutable_repo().add(std::move(ws));
    std::vector<OnlineEvent> events;
    for (const auto& [id, query] : requests_) {
        auto& sol = compositions_[id];
        if (!sol) {
            sol = solve(id, query);
            if (sol) events.push_back({"solved", id, sol->main, {}, {}});
        } else if (options_.reoptimize) {
            auto calls = search_online(*repo_, query, {}, searches_);
            if (calls && calls->size() < sol->main.size()) {
                detach(*sol);
                sol = std::make_shared<Solution>();
                sol->request_id = id;
                sol->query = query;
                sol->main = std::move(*calls);
                attach(*sol);
                compute_backups(sol);
                events.push_back({"solved", id, sol->main, {}, {}});
            }
        }
    }
    return events;
}

std::vector<OnlineEvent> OnlineState::delete_service(std::string_view name) {
    sync_pending(true);
    if (!repo_->find(name)) throw UnknownServiceError("unknown service: " + std::string(name));
    mutable_repo().remove(name);

    // Keys, not pointers: handling one request can free solutions listed for another.
    std::set<std::string> tops;
    std::set<std::pair<std::string, std::string>> backups;
    if (auto it = usages_.find(std::string(name)); it != usages_.end()) {
        for (const Solution* s : it->second) {
            if (s->parent)
                backups.emplace(s->request_id, s->replaces);
            else
                tops.insert(s->request_id);
        }
        usages_.erase(it);
    }

    std::vector<OnlineEvent> events;
    for (const std::string& id : tops) {
        auto& slot = compositions_.at(id);
        std::shared_ptr<Solution> old = slot;
        std::shared_ptr<Solution> bkp;
        if (auto b = old->backup.find(std::string(name)); b != old->backup.end()) bkp = b->second;
        detach(*old);
        if (bkp) {
            std::size_t before = searches_.load();
            auto fresh = std::make_shared<Solution>();
            fresh->request_id = id;
            fresh->query = old->query;
            fresh->main = bkp->stitched;
            attach(*fresh);
            slot = fresh;
            std::size_t swap_searches = searches_.load() - before;
            compute_backups(fresh);
            events.push_back({"swapped_to_backup", id, fresh->main, std::string(name), swap_searches});
        } else {
            slot = solve(id, old->query);
            if (slot)
                events.push_back({"resolved_from_scratch", id, slot->main, std::string(name), {}});
            else
                events.push_back({"request_lost", id, {}, std::string(name), {}});
        }
    }
    for (const auto& [id, replaced] : backups) {
        if (tops.contains(id)) continue;
        auto top = compositions_.find(id);
        if (top == compositions_.end() || !top->second) continue;
        Solution& parent = *top->second;
        auto it = parent.backup.find(replaced);
        if (it == parent.backup.end()) continue;
        detach(*it->second);
        parent.backup.erase(it);
        auto fresh = find_backup(parent, replaced);
        std::vector<std::string> calls;
        if (fresh) {
            calls = fresh->stitched;
            parent.backup[replaced] = fresh;
        }
        events.push_back({"backup_recomputed", parent.request_id, calls, replaced, {}});
    }
    return events;
}

std::vector<OnlineEvent> OnlineState::drop_composition_request(std::string_view id) {
    sync_pending(false);
    auto it = requests_.find(std::string(id));
    if (it == requests_.end()) throw std::invalid_argument("unknown request: " + std::string(id));
    if (auto& sol = compositions_[it->first]) detach(*sol);
    compositions_.erase(it->first);
    requests_.erase(it);
    return {};
}

bool OnlineState::usages_consistent() const {
    std::unordered_map<std::string, std::set<const Solution*>> rebuilt;
    std::function<void(const Solution&)> visit = [&](const Solution& s) {
        for (const auto& name : s.main) rebuilt[name].insert(&s);
        for (const auto& [name, b] : s.backup) visit(*b);
    };
    for (const auto& [id, sol] : compositions_)
        if (sol) visit(*sol);
    return rebuilt == usages_;
}

bool OnlineState::solutions_valid() const {
    for (const auto& [id, sol] : compositions_) {
        if (!sol) continue;
        if (!sequence_valid(*repo_, sol->query, sol->main)) return false;
        for (const auto& [name, b] : sol->backup)
            if (b->replaces != name || std::find(sol->main.begin(), sol->main.end(), name) == sol->main.end())
                return false;
    }
    return true;
}

}  // namespace wsc
