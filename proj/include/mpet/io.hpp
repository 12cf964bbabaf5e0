#pragma once

#include <iosfwd>
#include <string>

#include "mpet/assembly.hpp"

namespace mpet {

/// Matrix Market coordinate format, 1-based; symmetric storage writes the
/// lower triangle only.
void write_matrix_market(std::ostream& out, const SpMat& M, bool symmetric);
void write_matrix_market_file(const std::string& path, const SpMat& M, bool symmetric);

/// JSON sidecar describing the block offsets of an exported system.
std::string block_sidecar_json(const BlockSystem& sys);

/// Exports A, W, B_uv, B_p and the sidecar into a directory.
void export_system(const BlockSystem& sys, const std::string& directory);

std::string format_double(double x);  // %.17g, used by all CSV writers

}  // namespace mpet
