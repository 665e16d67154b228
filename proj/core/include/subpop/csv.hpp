#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "subpop/dataset.hpp"

namespace subpop {

/// Strict dataset CSV: UTF-8, comma separated, header required. Columns are
/// `loss`, `z0`..`z{d-1}` (contiguous, d >= 1) and optionally `mu_hat`, in any
/// order. Scientific notation is accepted. Diagnostics name the offending row
/// (1-based, counting data rows) and column.
Dataset parse_csv(std::string_view text);
Dataset load_csv(const std::string& path);

/// Lenient reader for commands that only need losses: requires a `loss`
/// column, ignores everything else.
std::vector<double> parse_loss_column(std::string_view text);
std::vector<double> load_loss_column(const std::string& path);

/// Serialization with 17 significant digits, so that a write/parse round trip
/// reproduces every double bit-for-bit.
std::string to_csv(const Dataset& ds);
void write_csv(const Dataset& ds, const std::string& path);

std::string read_file(const std::string& path);

}  // namespace subpop
