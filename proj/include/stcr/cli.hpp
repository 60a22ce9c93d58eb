#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "stcr/config.hpp"
#include "stcr/gradcheck.hpp"

namespace stcr {

/// Subcommands gen-data, pretrain, probe, retrieve, viz-matrix, viz-heatmap
/// and gradcheck. Exit code 0 on success, 1 on usage errors, 2 on runtime errors.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

/// Whole-pipeline gradient check: backbone, psi, inverse transform, both heads
/// and both losses, with the crop, transform and mixup fixed by `seed`.
/// The video is 4 pixels larger than the crop on each spatial axis.
GradCheckReport siamese_gradcheck(const BackboneConfig& model, const TrainConfig& train, std::uint64_t seed,
                                  double eps);

}  // namespace stcr
