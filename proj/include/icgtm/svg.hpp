#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <vector>

#include "icgtm/io.hpp"
#include "icgtm/types.hpp"

// Side-by-side SVG overlay: both images as outlined panels, one line per
// correspondence from the left keypoint to the (offset) right keypoint.
// Cluster ids cycle through a fixed palette; outliers are black; unclustered
// selections are gray. Output depends only on the inputs, byte for byte.

namespace icgtm {
namespace detail {

inline constexpr std::array<const char*, 12> kPalette = {
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#46f0f0",
    "#f032e6", "#9a6324", "#008080", "#bcf60c", "#ffd8b1", "#800000"};

inline constexpr const char* kOutlierColor = "#000000";
inline constexpr const char* kUnlabeledColor = "#888888";

inline const char* label_color(int label) {
  if (label == kOutlier) return kOutlierColor;
  if (label == kUnlabeled) return kUnlabeledColor;
  return kPalette[static_cast<std::size_t>(label) % kPalette.size()];
}

}  // namespace detail

inline std::string render_svg(const CorrespondenceSet& set,
                              const MatchResult& result) {
  if (result.indices.size() != set.items.size())
    throw validation_error("result covers " + std::to_string(result.indices.size()) +
                           " correspondences, set has " +
                           std::to_string(set.items.size()));
  std::map<int, int> label_of;  // stable id -> label
  for (std::size_t i = 0; i < result.indices.size(); ++i)
    label_of[result.indices[i]] = result.labels[i];

  const int gap = 24;
  const int margin = 16;
  const double right_dx = set.left_size.width + gap;
  const int k = static_cast<int>(result.homographies.size());
  const bool any_unlabeled =
      std::find(result.labels.begin(), result.labels.end(), kUnlabeled) !=
      result.labels.end();
  // One row per cluster, the outlier row, and the unclustered row if used.
  const int legend_rows = k + 1 + (any_unlabeled ? 1 : 0);
  const int width = margin * 2 + set.left_size.width + gap + set.right_size.width;
  const int height = margin * 2 +
                     std::max(set.left_size.height, set.right_size.height) +
                     18 * (legend_rows + 1);

  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  int outliers = 0;
  int unlabeled = 0;

  std::string body;
  // Outliers in document order first, then clusters, so color sits on top.
  for (int pass = 0; pass < 2; ++pass) {
    for (const Correspondence& c : set.items) {
      const auto it = label_of.find(c.index);
      if (it == label_of.end())
        throw validation_error("result is missing correspondence id " +
                               std::to_string(c.index));
      const int label = it->second;
      if ((label == kOutlier) != (pass == 0)) continue;
      if (pass == 1) {
        if (label == kUnlabeled)
          ++unlabeled;
        else
          ++counts[static_cast<std::size_t>(label)];
      } else {
        ++outliers;
      }
      const double x1 = margin + c.left.position.x();
      const double y1 = margin + c.left.position.y();
      const double x2 = margin + right_dx + c.right.position.x();
      const double y2 = margin + c.right.position.y();
      const char* color = detail::label_color(label);
      body += "<line x1=\"";
      detail::append_number(body, x1);
      body += "\" y1=\"";
      detail::append_number(body, y1);
      body += "\" x2=\"";
      detail::append_number(body, x2);
      body += "\" y2=\"";
      detail::append_number(body, y2);
      body += "\" stroke=\"";
      body += color;
      body += "\" stroke-width=\"1\" stroke-opacity=\"0.75\"/>\n";
      for (const auto& [cx, cy] : {std::pair{x1, y1}, std::pair{x2, y2}}) {
        body += "<circle cx=\"";
        detail::append_number(body, cx);
        body += "\" cy=\"";
        detail::append_number(body, cy);
        body += "\" r=\"2\" fill=\"";
        body += color;
        body += "\"/>\n";
      }
    }
  }

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"";
  detail::append_number(svg, width);
  svg += "\" height=\"";
  detail::append_number(svg, height);
  svg += "\" viewBox=\"0 0 ";
  detail::append_number(svg, width);
  svg += ' ';
  detail::append_number(svg, height);
  svg += "\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (const auto& [x, size] :
       {std::pair{static_cast<double>(margin), set.left_size},
        std::pair{margin + right_dx, set.right_size}}) {
    svg += "<rect x=\"";
    detail::append_number(svg, x);
    svg += "\" y=\"";
    detail::append_number(svg, margin);
    svg += "\" width=\"";
    detail::append_number(svg, size.width);
    svg += "\" height=\"";
    detail::append_number(svg, size.height);
    svg += "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
  }
  svg += body;

  double ly = margin + std::max(set.left_size.height, set.right_size.height) + 20;
  const auto legend_row = [&](const char* color, const std::string& text) {
    svg += "<rect x=\"";
    detail::append_number(svg, margin);
    svg += "\" y=\"";
    detail::append_number(svg, ly);
    svg += "\" width=\"12\" height=\"12\" fill=\"";
    svg += color;
    svg += "\"/>\n<text x=\"";
    detail::append_number(svg, margin + 18);
    svg += "\" y=\"";
    detail::append_number(svg, ly + 10.0);
    svg += "\" font-family=\"monospace\" font-size=\"12\">";
    svg += text;
    svg += "</text>\n";
    ly += 18;
  };
  for (int i = 0; i < k; ++i)
    legend_row(detail::label_color(i),
               "cluster " + std::to_string(i) + ": " +
                   std::to_string(counts[static_cast<std::size_t>(i)]));
  if (unlabeled > 0)
    legend_row(detail::kUnlabeledColor,
               "selected, unclustered: " + std::to_string(unlabeled));
  legend_row(detail::kOutlierColor, "outliers: " + std::to_string(outliers));
  svg += "</svg>\n";
  return svg;
}

}  // namespace icgtm
