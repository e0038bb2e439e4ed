#ifndef CEC_TOOLS_SVG_H
#define CEC_TOOLS_SVG_H

#include <string>
#include <string_view>

namespace cec::tools {

enum class ChartKind { kLine };

// Line chart of a trace CSV. Column 0 is x; the first other column that is
// not "algo" or "event" is y. Rows are grouped into one polyline per "algo"
// value (a single unnamed series when the column is absent); a one-row
// series becomes a marker. Output depends only on the input bytes.
// Throws InvalidArgument on malformed CSV.
std::string emit_svg(std::string_view csv, ChartKind kind = ChartKind::kLine);

}  // namespace cec::tools

#endif  // CEC_TOOLS_SVG_H
