#include "rtetr/error.hpp"

#include <iostream>
#include <utility>

namespace rtetr {

namespace {
WarningSink& sink() {
  static WarningSink s;
  return s;
}
}  // namespace

void set_warning_sink(WarningSink s) { sink() = std::move(s); }

void warn(std::string_view message) {
  if (sink()) {
    sink()(message);
  } else {
    std::clog << "warning: " << message << '\n';
  }
}

}  // namespace rtetr
