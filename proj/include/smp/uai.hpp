#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "smp/model.hpp"

namespace smp {

using Evidence = std::vector<std::pair<VarId, int>>;

// Parses a MARKOV-preamble model file. Tables are indexed row-major with the
// last scope variable fastest; they are re-laid into canonical scope order.
GraphicalModel parse_uai(std::string_view text);
GraphicalModel read_uai_file(const std::string& path);

// Writes canonical (sorted-scope) tables; parse_uai(write_uai(m)) == m.
std::string write_uai(const GraphicalModel& model);

// "count var val var val ...".
Evidence parse_evidence(std::string_view text);
Evidence read_evidence_file(const std::string& path);

// Zeroes every table entry inconsistent with the evidence.
GraphicalModel absorb_evidence(const GraphicalModel& model, const Evidence& evidence);

}  // namespace smp
