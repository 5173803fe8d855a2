#pragma once

#include <optional>
#include <span>
#include <vector>

#include "wsc/core.hpp"

namespace wsc {

// Heuristic benefit estimates. Indexed by ParameterId::value and by service
// position in the repository.
struct ScoreTable {
    std::vector<double> param_score;
    std::vector<double> service_score;

    double param(ParameterId id) const {
        return id.value < param_score.size() ? param_score[id.value] : 0.0;
    }
};

inline constexpr double kGoalSeedScore = 1.0;

ScoreTable compute_scores(const Repository& repo, const Request& req);

// Same propagation over an arbitrary service list; used by the hierarchical
// engine on its concept-level projection.
ScoreTable compute_scores(std::span<const Service> services, const ParamSet& goal,
                          std::size_t param_bound);

struct NameSearchOptions {
    bool use_scores = true;
    bool reduce = true;
};

std::optional<Composition> find_composition(const Repository& repo, const Request& req,
                                            NameSearchOptions options = {});

// One usefulness sweep. Returns the positions of calls that are kept.
std::vector<std::size_t> reduce_sequence(std::span<const Service* const> calls, const Request& req);

// Single application of the two-pass reduction. Throws std::invalid_argument
// if comp is not valid for req.
Composition reduce_composition(const Repository& repo, const Request& req, const Composition& comp);

// Applies reduce_composition until nothing is removed, at most |repo| times.
Composition reduce_to_fixpoint(const Repository& repo, const Request& req, Composition comp);

}  // namespace wsc
