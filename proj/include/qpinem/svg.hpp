#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qpinem::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Self-contained SVG documents; output depends only on the inputs.
std::string line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series);

// values(i, j) is drawn at column i (x_axis) and row j (y_axis).
std::string heatmap(const std::string& title, const std::string& x_label, const std::string& y_label,
                    const std::vector<double>& x_axis, const std::vector<double>& y_axis,
                    const Eigen::MatrixXd& values, bool diverging = false);

}  // namespace qpinem::svg
