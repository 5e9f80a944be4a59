#include "wavegraph/rng.hpp"

#include <sstream>

#include "wavegraph/error.hpp"

namespace wavegraph {

std::string Rng::state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void Rng::restore(const std::string& state) {
  std::istringstream is(state);
  std::mt19937_64 engine;
  is >> engine;
  if (is.fail()) throw DataError("malformed random generator state");
  engine_ = engine;
}

}  // namespace wavegraph
