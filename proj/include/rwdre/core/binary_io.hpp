#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <type_traits>

#include "rwdre/core/errors.hpp"

namespace rwdre::binary {

static_assert(std::endian::native == std::endian::little,
              "binary caches assume a little-endian host");

template <class T>
  requires std::is_arithmetic_v<T>
void write(std::ostream& os, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  os.write(buf, sizeof(T));
}

template <class T>
  requires std::is_arithmetic_v<T>
T read(std::istream& is) {
  char buf[sizeof(T)];
  if (!is.read(buf, sizeof(T))) {
    throw ParameterError("truncated binary stream");
  }
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace rwdre::binary
