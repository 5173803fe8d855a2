#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "wsc/io.hpp"

namespace wsc::cli {

struct SolveOptions {
    std::optional<io::Model> expected_model;  // when set, the instance tag must match
    bool use_scores = true;
    bool reduce = true;        // name and hierarchical engines
    bool oo_reduce = false;    // opt-in for the object-oriented engine
    bool use_rules = true;
    std::size_t object_cap = 4;
    bool both_orientations = false;
};

struct RunReport {
    std::string model;
    double time_ms = 0.0;
    bool solved = false;
    std::size_t length = 0;
    std::optional<std::size_t> execution_path;
    std::optional<std::size_t> rule_applications;
    bool valid = false;
};

io::Json to_json(const RunReport& r);

// Solves a parsed instance. Timing covers the search only. `composition`
// receives the emitted composition JSON (null when unsolved). Throws
// io::InputError for malformed instances.
RunReport solve_instance(const io::Json& instance, const SolveOptions& options, io::Json* composition = nullptr);

// Validates a composition JSON against an instance. Throws io::InputError for
// malformed input and UnknownServiceError for names missing from the instance.
io::Json validate_instance(const io::Json& instance, const io::Json& composition, bool both_orientations = false);

// Entry point behind the composer executable. Returns the process exit code:
// 0 solved/valid, 1 unsolvable/invalid, 2 input error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wsc::cli
