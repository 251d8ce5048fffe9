// config.hpp - experiment configuration for the koopq command line tool.

#pragma once

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace koopq::cli {

inline constexpr int schema_version = 1;

// Raised for any malformed or out-of-range configuration value; the message
// starts with the offending key path.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SystemConfig {
    std::string kind = "rotation";  // rotation | orbit
    std::vector<double> alpha{1.0};
    int states = 8;
    std::vector<double> x0{1.0};
    int initial_state = 0;
    double dt = 0.01;
    std::size_t samples = 1000;
};

struct KernelConfig {
    double tau = 0.1;
    double p = 0.5;
    int bandwidth = 8;
    int galerkin_bandwidth = 3;
};

struct FockConfig {
    double sigma_w = 2.0;
    double p_w = 0.75;
    int nmax = 6;
    std::size_t modes = 7;
    double sigma = 0.2;
    double kernel_kappa = 1.0;
    std::vector<int> m{1, 2, 3};
    std::size_t grid = 64;
    std::vector<double> x{1.0};
    std::vector<double> times{0.0, 1.0};
    std::vector<int> tn_orders{1, 2, 3};
    double tn_kappa = 10.0;
    double tn_sigma = 0.0;
    int tn_bandwidth = 32;
};

struct ObservationConfig {
    std::string kernel = "gaussian";  // gaussian | event | uninformative
    double epsilon = 0.5;
    double delta = 0.5;
    double noise_sd = 0.0;
};

struct QmdaConfig {
    std::size_t rank = 4;
    int steps = 20;
    std::size_t grid = 256;
    ObservationConfig observation{};
    std::string observations_csv;
};

struct QcircConfig {
    std::vector<int> q{2, 3, 4, 5, 6};
    std::vector<double> t{0.0, 2.0};
    std::vector<double> x{1.0};
    std::string observable = "cos";
    int export_q = -1;  // -1: largest q of the sweep
    std::size_t shots = 0;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    SystemConfig system{};
    KernelConfig kernel{};
    FockConfig fock{};
    QmdaConfig qmda{};
    QcircConfig qcirc{};
    std::string output_dir = "out";

    std::size_t dim() const noexcept { return system.alpha.size(); }
};

// Parses and validates; unknown keys and out-of-range values raise
// ConfigError naming the key path.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Canonical JSON of a validated config (all defaults filled in).
nlohmann::json to_json(const ExperimentConfig& cfg);

// FNV-1a of the canonical dump without the output block, hex.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace koopq::cli
