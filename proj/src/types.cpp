#include "kfc/types.hpp"

#include "kfc/errors.hpp"

#include <algorithm>
#include <cctype>

namespace kfc {

std::string task_name(Task t) {
  return t == Task::Regression ? "regression" : "classification";
}

Task task_from_name(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (n == "regression") return Task::Regression;
  if (n == "classification") return Task::Classification;
  throw InvalidSpec("unknown task \"" + name +
                    "\" (expected regression|classification)");
}

} // namespace kfc
