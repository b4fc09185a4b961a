#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace evotrack::svg {

struct Trace {
  std::string label;
  std::string color;
  std::vector<double> y;
  bool line = true;  // false: markers only
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  /// Tick labels for x positions 0..n-1; thinned automatically.
  std::vector<std::string> x_ticks;
  /// Indices drawn with a highlighted marker on the first trace.
  std::vector<std::size_t> highlights;
  double width = 720;
  double height = 360;
};

/// Self-contained SVG chart of one or more traces over a shared index axis.
void write_chart(std::ostream& out, const std::vector<Trace>& traces,
                 const ChartOptions& options);

/// Several charts stacked vertically in one document.
void write_stacked(std::ostream& out,
                   const std::vector<std::pair<std::vector<Trace>, ChartOptions>>& charts);

std::string escape(std::string_view text);

}  // namespace evotrack::svg
