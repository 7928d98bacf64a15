#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace poda::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kInstructionTemplateId = "following-the-order/v1";

/// Runs `poda <command> ...`; args excludes the program name.
/// Commands: ingest, validate, sample, augment, score, audit, stats.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace poda::cli
