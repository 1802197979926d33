#pragma once

#include <iosfwd>
#include <string>

#include "phimdp/history.hpp"

namespace phimdp {

/// Trace CSV: header `t,o,a,r`, one cycle per line with symbol labels, t from 1.
/// The final line may carry only `t,o` (the trailing observation).
void write_trace(std::ostream& out, const History& h);
std::string trace_to_string(const History& h);

/// Parses a trace, inferring alphabets from the labels that occur
/// (see canonical_label_order).
History read_trace(std::istream& in, const std::string& source = "<trace>");
/// Parses a trace against fixed alphabets; unknown labels are errors.
History read_trace(std::istream& in, std::shared_ptr<const Alphabets> alphabets,
                   const std::string& source = "<trace>");
History load_trace(const std::string& path);

}  // namespace phimdp
