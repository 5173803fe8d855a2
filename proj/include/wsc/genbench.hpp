#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wsc/io.hpp"

namespace wsc::gen {

struct GenConfig {
    std::size_t num_web_services = 100;
    std::size_t pars_per_service = 5;
    std::size_t num_parameters = 1000;
    std::size_t num_ws_in_solution = 10;
    std::uint64_t seed = 1;

    // hierarchical
    std::size_t taxonomy_size = 50;
    std::string taxonomy_shape = "random";  // random | flat | chain

    // relational
    std::size_t stage_count = 3;
    std::size_t relation_count = 3;
    double noise_ratio = 0.5;
    bool planted_rules = true;

    // oo
    std::size_t concept_count = 10;
    std::size_t property_count = 10;

    // online
    std::size_t query_count = 5;
};

// Throws io::InputError on unknown keys or invalid counts.
GenConfig parse_config(const io::Json& j);
io::Json to_json(const GenConfig& cfg);
// Throws io::InputError when the counts cannot produce an instance.
void check_config(const GenConfig& cfg);

struct PlantedBackup {
    std::string query;
    std::string service;  // main-chain service the backup replaces
    int type = 0;
};

struct PlannedDeletion {
    std::string service;
    std::string query;
    std::string expected_event;  // swapped_to_backup | backup_recomputed | request_lost
};

struct GroundTruth {
    std::vector<std::string> planted_chain;
    std::vector<std::size_t> stage_boundaries;       // relational: chain index where each stage starts
    io::Json planted_composition;                    // model-specific composition JSON
    std::vector<std::pair<std::string, std::vector<std::string>>> query_chains;  // online
    std::vector<PlantedBackup> backups;              // online, one per main service that has one
    std::vector<PlannedDeletion> deletions;          // online
};

io::Json to_json(const GroundTruth& truth);

struct Generated {
    io::Json instance;
    GroundTruth truth;
    std::vector<io::Json> events;  // online only
};

Generated generate_name_instance(const GenConfig& cfg);
Generated generate_hierarchical_instance(const GenConfig& cfg);
Generated generate_relational_instance(const GenConfig& cfg);
Generated generate_oo_instance(const GenConfig& cfg);
Generated generate_online_scenario(const GenConfig& cfg);

Generated generate(io::Model model, const GenConfig& cfg);

// Deterministic random source. Bounded draws avoid std distributions, whose
// output differs between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    // Seed for an independent phase of one generator run.
    static std::uint64_t phase_seed(std::uint64_t seed, std::uint64_t phase);

    std::uint64_t below(std::uint64_t n);  // uniform in [0, n), n > 0
    std::uint64_t between(std::uint64_t lo, std::uint64_t hi);  // inclusive
    bool chance(double p);
    // k distinct values from [0, n) in draw order.
    std::vector<std::size_t> distinct(std::size_t k, std::size_t n);
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }
    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[below(v.size())];
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace wsc::gen
