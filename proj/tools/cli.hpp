// cli.hpp - command implementations behind the koopq executable.

#pragma once

#include "config.hpp"

#include <atomic>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <thread>
#include <vector>

namespace koopq::cli {

enum ExitCode : int { exit_ok = 0, exit_internal = 1, exit_validation = 2, exit_degenerate = 3 };

struct RunContext {
    ExperimentConfig cfg;
    std::filesystem::path out;
    unsigned threads = 1;
};

// `# koopq <version> command=<name> config_hash=<hash> schema_version=1`
std::string header_line(const std::string& command, const ExperimentConfig& cfg);

// Each command writes its CSV files under ctx.out and returns the paths in
// the order written. Errors propagate as exceptions.
std::vector<std::filesystem::path> cmd_rotate(const RunContext& ctx, std::ostream& log);
std::vector<std::filesystem::path> cmd_filter(const RunContext& ctx, std::ostream& log);
std::vector<std::filesystem::path> cmd_koopman(const RunContext& ctx, std::ostream& log);
std::vector<std::filesystem::path> cmd_qcirc(const RunContext& ctx, std::ostream& log);

// Full command line (without argv[0]); returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Runs fn(i) for i in [0, n) on up to `threads` workers. Callers store
// results by index, so output order never depends on scheduling. The first
// exception (lowest index) is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t k = std::min<std::size_t>(threads, n);
    for (std::size_t t = 0; t < k; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace koopq::cli
