#ifndef XDIFF_COMMANDS_HPP
#define XDIFF_COMMANDS_HPP

#include <string>

#include "xdiff/config.hpp"
#include "xdiff/models.hpp"

namespace xdiff {

// Exit-code contract: 0 success, 1 domain failure (certification failed,
// solver diverged), 2 usage/config/corrupt-input error.
int cmd_certify(const std::string& config_path, const std::string& out_dir, int threads);
int cmd_simulate(const std::string& config_path, const std::string& out_dir, int threads,
                 bool skip_certify);
int cmd_probe(const std::string& trajectory_path, const std::string& config_path,
              const std::string& out_dir, int threads);
int cmd_convergence(const std::string& config_path, const std::string& out_dir, int threads);

// Model and grid construction from a parsed config (shared with tests).
CrossDiffusionModel model_from_config(const Config& cfg);
SpaceTimeGrid grid_from_config(const Config& cfg, int n_species);

}  // namespace xdiff

#endif
