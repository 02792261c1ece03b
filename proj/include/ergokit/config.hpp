#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ergokit/averaging.hpp"
#include "ergokit/dynamics.hpp"
#include "ergokit/group.hpp"
#include "ergokit/series.hpp"

namespace ergo {

// Declarative experiment description, parsed from a JSON document (a file or
// a bundled preset). Scalar fields common to all kinds are lifted into the
// struct; kind-specific blocks (system, observables, phis, family, function,
// h_list) stay in `raw` and are interpreted by the build_* helpers so that a
// config error surfaces as config_error with the offending key in the
// message.
struct ExperimentConfig {
    std::string id;
    std::string kind; // wm | ergodic | l2wm | product-equivalence | vdc-suite |
                      // gamma | order-k | pipeline | kvn | inequality-fuzz
    std::string sequence = "z-initial";
    int rank = 1;            // scaled-ball sequences
    Rat spacing = Rat(1, 8); // scaled-ball sequences

    long long n_max = 0;
    std::vector<long long> m_list;
    int k = 0;
    double c_bound = 0;
    TrendPolicy policy;
    std::vector<Num> epsilons; // empty means default_epsilons()

    std::optional<std::uint64_t> seed;
    long long trials = 1000;        // inequality-fuzz
    long long size_cap = 30;        // inequality-fuzz: max |Lambda|
    int dim_cap = 8;                // inequality-fuzz: max value dimension
    bool corrupt_self_test = false; // inequality-fuzz harness self-check

    // declared outcome: "pass" (default), "fail", "inconclusive", "refusal".
    // A run exits 0 exactly when the outcome matches the declaration.
    std::string expected = "pass";

    std::string out_dir = "out";

    nlohmann::json raw;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Builders for the kind-specific blocks; all throw config_error on unknown
// names or malformed shapes.
FolnerSequence build_sequence(const ExperimentConfig& cfg);
MPSystem build_system(const ExperimentConfig& cfg);
std::vector<Observable> build_observables(const ExperimentConfig& cfg, const MPSystem& sys);
std::vector<Homomorphism> build_phis(const ExperimentConfig& cfg, int rank);
TranslationalFamily build_family(const ExperimentConfig& cfg,
                                 const std::vector<Homomorphism>& phis);
GroupFunction build_group_function(const ExperimentConfig& cfg);
std::vector<GroupElement> build_h_list(const ExperimentConfig& cfg, int rank);

} // namespace ergo
