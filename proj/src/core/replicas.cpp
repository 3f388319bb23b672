#include "rwdre/core/replicas.hpp"

#include <cstdlib>
#include <string>
#include <thread>

namespace rwdre {

int worker_count() {
  if (const char* env = std::getenv("RWDRE_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
      // fall through to the default
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace rwdre
