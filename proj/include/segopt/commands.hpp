#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "segopt/instance.hpp"
#include "segopt/seg_solver.hpp"

namespace segopt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitFailure = 3;

const std::vector<std::string>& command_names();

// Writes report.json and the command's CSV files into out_dir (created if
// needed) and returns kExitOk or kExitFailure when a verification fails.
// Invalid input for the command raises InvalidInstance.
int run_command(const std::string& command, const ProblemInstance& inst, const std::filesystem::path& out_dir,
                std::ostream& log);

// Maps an error to the process exit code.
int exit_code_for(const Error& e);

void write_segments_csv(const std::filesystem::path& path, const Segmentation& seg, const ValueGrid& grid,
                        const CostSpec& cost);
void write_rent_curves_csv(const std::filesystem::path& path, const SolveReport& report, std::size_t samples = 257);

}  // namespace segopt
