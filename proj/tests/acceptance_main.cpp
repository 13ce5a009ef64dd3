#include "checks/acceptance.hpp"

#include <cstdlib>
#include <string>
#include <vector>

// Usage: acceptance [id...]. Exit status is the number of failed criteria.
int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  return icp::acceptance::run_and_report(ids);
}
