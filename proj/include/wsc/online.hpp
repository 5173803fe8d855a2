#pragma once

#include <atomic>
#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "wsc/core.hpp"

namespace wsc {

// Versioned view of the dynamic repository. Background backup searches hold a
// shared snapshot; OnlineState copies it before mutating (copy-on-write).
class RepoSnapshot {
public:
    RepoSnapshot() = default;

    std::span<const Service> services() const { return services_; }
    const Service* find(std::string_view name) const;
    std::optional<std::size_t> index_of(std::string_view name) const;
    std::span<const std::size_t> consumers(ParameterId p) const;
    std::span<const std::size_t> producers(ParameterId p) const;
    std::uint64_t version() const { return version_; }

    std::size_t param_bound() const { return input_for_.size(); }

    // Mutators; OnlineState copies a snapshot before mutating a shared one.
    void add(Service s);
    void remove(std::string_view name);

private:
    void index_service(std::size_t i);
    void reindex();
    std::vector<Service> services_;  // registration order
    std::unordered_map<std::string, std::size_t> by_name_;
    std::vector<std::vector<std::size_t>> input_for_;
    std::vector<std::vector<std::size_t>> output_for_;
    std::uint64_t version_ = 0;
};

struct OnlineQuery {
    ParamSet known;
    ParamSet required;
};

struct Solution {
    std::string request_id;
    OnlineQuery query;
    std::vector<std::string> main;
    std::map<std::string, std::shared_ptr<Solution>> backup;

    // Backup-only fields. main holds the replacement services; stitched is the
    // reduced composition for the parent query that a swap activates.
    Solution* parent = nullptr;
    std::string replaces;
    int type = 0;
    std::vector<std::string> stitched;

    bool alive = true;
};

// Services mapped to their backward distance to the goal; unreachable
// services are absent.
using DistanceScore = std::unordered_map<std::string, std::size_t>;

struct OnlineEvent {
    std::string kind;  // solved, unsolvable, swapped_to_backup, resolved_from_scratch, request_lost, backup_recomputed
    std::string id;
    std::vector<std::string> calls;
    std::string service;                 // backup_recomputed: the main service the entry covers
    std::optional<std::size_t> searches; // swapped_to_backup: searches run to activate the swap
};

struct OnlineOptions {
    bool reoptimize = false;
    bool async_backups = false;
};

struct BackupPlan {
    int type = 0;
    std::vector<std::string> replacement;
    std::vector<std::string> stitched;
};

// Pure search helpers over a snapshot. `searches` counts composition searches.
DistanceScore compute_service_scores(const RepoSnapshot& repo, const OnlineQuery& query);
std::optional<std::vector<std::string>> search_online(const RepoSnapshot& repo, const OnlineQuery& query,
                                                      std::string_view excluded, std::atomic<std::size_t>& searches);
std::optional<BackupPlan> plan_backup(const RepoSnapshot& repo, const OnlineQuery& query,
                                      const std::vector<std::string>& main, std::size_t position,
                                      std::atomic<std::size_t>& searches);

class OnlineState {
public:
    explicit OnlineState(OnlineOptions options = {});
    ~OnlineState();
    OnlineState(const OnlineState&) = delete;
    OnlineState& operator=(const OnlineState&) = delete;

    std::vector<OnlineEvent> register_service(Service ws);
    std::vector<OnlineEvent> delete_service(std::string_view name);
    std::vector<OnlineEvent> find_composition(const std::string& id, OnlineQuery query);
    std::vector<OnlineEvent> drop_composition_request(std::string_view id);

    DistanceScore compute_service_scores(const OnlineQuery& query) const;
    std::optional<std::vector<std::string>> find_composition_online(const OnlineQuery& query) const;
    std::shared_ptr<Solution> find_backup(Solution& sol, std::string_view service);

    // Waits for background backup work and installs it.
    void finish();

    const RepoSnapshot& repository() const { return *repo_; }
    const Solution* solution(std::string_view id) const;
    bool has_request(std::string_view id) const { return requests_.contains(std::string(id)); }
    std::vector<std::string> request_ids() const;
    std::size_t search_count() const { return searches_.load(); }
    const std::unordered_map<std::string, std::set<const Solution*>>& usages() const { return usages_; }

    // Rebuilds the usages index from all solutions and compares.
    bool usages_consistent() const;
    // Every top-level main validates against the current repository.
    bool solutions_valid() const;

private:
    struct Pending {
        std::shared_ptr<Solution> solution;
        std::shared_ptr<const RepoSnapshot> snapshot;
        std::future<std::vector<std::pair<std::size_t, std::optional<BackupPlan>>>> result;
    };

    std::shared_ptr<Solution> solve(const std::string& id, const OnlineQuery& query);
    void compute_backups(const std::shared_ptr<Solution>& sol);
    std::shared_ptr<Solution> make_backup(Solution& parent, std::size_t position, BackupPlan plan);
    void attach(const Solution& sol);
    void detach(Solution& sol);
    void sync_pending(bool deleting);
    void install(Pending& p);
    RepoSnapshot& mutable_repo();

    OnlineOptions options_;
    std::shared_ptr<RepoSnapshot> repo_;
    std::map<std::string, OnlineQuery> requests_;
    std::map<std::string, std::shared_ptr<Solution>> compositions_;  // null when unsolved
    std::unordered_map<std::string, std::set<const Solution*>> usages_;
    mutable std::atomic<std::size_t> searches_{0};
    std::vector<Pending> pending_;
    std::vector<std::future<std::vector<std::pair<std::size_t, std::optional<BackupPlan>>>>> abandoned_;
};

}  // namespace wsc
