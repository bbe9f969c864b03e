#pragma once

// Hand-emitted grouped bar charts. Layout is fixed so identical data always
// yields identical bytes:
//
//   width 720, height 420, margins L 60 / R 20 / T 40 / B 110
//   bars share each category slot 80/20 with the gap; y axis rounds up to a
//   1-2-5 step with five gridlines; labels are rotated 40 degrees.

#include <string>
#include <vector>

namespace ebike::svg {

struct Series {
    std::string name;
    std::vector<double> values;  // one per category
};

std::string escape(const std::string& s);

// Throws DomainError when a series length differs from the category count.
std::string bar_chart(const std::string& title, const std::vector<std::string>& categories,
                      const std::vector<Series>& series);

}  // namespace ebike::svg
