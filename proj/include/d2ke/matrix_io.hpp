#pragma once

#include <string>
#include <string_view>

#include "d2ke/parallel.hpp"

namespace d2ke {

// Dense text matrix: `rows cols` header, then one row per line with
// space-separated values at 17 significant digits.
std::string format_matrix(const RowMatrix& m);
RowMatrix parse_matrix(std::string_view text);
void write_matrix(const RowMatrix& m, const std::string& path);
RowMatrix read_matrix(const std::string& path);

}  // namespace d2ke
