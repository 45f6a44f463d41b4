#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sfelab/counterfactual.hpp"
#include "sfelab/csv.hpp"

namespace sfelab::cf {

namespace {

// Linear blend from white to blue (t < 0) or red (t > 0), |t| <= 1.
std::string diverging(double t) {
  if (!std::isfinite(t)) return "#bbbbbb";
  t = std::clamp(t, -1.0, 1.0);
  const auto mix = [&](int full) {
    return static_cast<int>(std::lround(255.0 + (full - 255.0) * std::abs(t)));
  };
  if (t < 0.0) return fmt::format("#{:02x}{:02x}{:02x}", mix(33), mix(102), mix(172));
  return fmt::format("#{:02x}{:02x}{:02x}", mix(178), mix(24), mix(43));
}

}  // namespace

std::string grid_to_svg(const CounterfactualGrid& grid) {
  constexpr int cell_w = 48;
  constexpr int cell_h = 28;
  constexpr int left = 70;
  constexpr int top = 40;
  const int cols = grid.deciles;
  const int rows = static_cast<int>(grid.kappas.size());
  const int width = left + cols * cell_w + 20;
  const int height = top + rows * cell_h + 50;

  double scale = 0.0;
  for (const auto& c : grid.cells) {
    if (c.count > 0) scale = std::max(scale, std::abs(c.mean_abs_diff));
  }

  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
      "font-size=\"11\">\n",
      width, height);
  s += fmt::format("<text x=\"{}\" y=\"20\">mean price difference (scale +/-{})</text>\n", left,
                   io::format_number(scale));
  for (int r = 0; r < rows; ++r) {
    const int y = top + r * cell_h;
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", left - 6, y + cell_h / 2 + 4,
                     io::format_number(grid.kappas[static_cast<std::size_t>(r)]));
    for (int c = 0; c < cols; ++c) {
      const auto& cell = grid.cell(static_cast<std::size_t>(r), c + 1);
      const double t = cell.count == 0 ? std::nan("") : (scale > 0.0 ? cell.mean_abs_diff / scale : 0.0);
      s += fmt::format(
          "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#ffffff\">"
          "<title>kappa={} decile={} diff={}</title></rect>\n",
          left + c * cell_w, y, cell_w, cell_h, diverging(t), io::format_number(cell.kappa), cell.decile,
          io::format_number(cell.mean_abs_diff));
    }
  }
  const int label_y = top + rows * cell_h + 16;
  for (int c = 0; c < cols; ++c) {
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                     left + c * cell_w + cell_w / 2, label_y, c + 1);
  }
  s += fmt::format("<text x=\"{}\" y=\"{}\">water stock decile</text>\n", left, label_y + 18);
  s += fmt::format("<text x=\"8\" y=\"{}\">kappa</text>\n", top - 6);
  s += "</svg>\n";
  return s;
}

}  // namespace sfelab::cf
