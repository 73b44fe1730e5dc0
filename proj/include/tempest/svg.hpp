#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace tempest {

// Minimal deterministic SVG charts for the experiment outputs. Presentation
// only; the CSVs are the data of record.

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<SvgSeries>& series);

void write_bar_chart(const std::filesystem::path& path, const std::string& title,
                     const std::string& y_label,
                     const std::vector<std::pair<std::string, double>>& bars);

void write_scatter_chart(const std::filesystem::path& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<SvgSeries>& series);

void write_histogram_chart(const std::filesystem::path& path, const std::string& title,
                           const std::array<long long, 12>& counts);

}  // namespace tempest
