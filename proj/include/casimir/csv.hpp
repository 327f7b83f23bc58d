#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "casimir/harness.hpp"

namespace casimir::csv {

// Lines written as "# key: value" ahead of the header row.
using Metadata = std::vector<std::pair<std::string, std::string>>;

/// 12 significant digits, shortest form, independent of the global locale.
std::string format_double(double x);

/// Header: L,alpha_over_v,delta_l,mean_w[pi*v/l_final],m2_w[(pi*v/l_final)^2],mean_n,m2_n
void write_sweep(std::ostream& out, const SweepTable& table, const Metadata& meta = {});

/// Reads a table written by write_sweep.  Column names are matched with or
/// without their unit suffix.  Throws DomainError on schema mismatch.
SweepTable read_sweep(std::istream& in);

/// One row per speed: alpha_over_v, the six fit coefficients, residuals,
/// condition estimates and a status column.
void write_speed_sweep(std::ostream& out, const std::vector<SpeedRow>& rows, const Metadata& meta = {});

}  // namespace casimir::csv
