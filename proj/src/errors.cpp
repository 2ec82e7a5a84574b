#include "levy/errors.hpp"

namespace levy {

void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

}  // namespace levy
