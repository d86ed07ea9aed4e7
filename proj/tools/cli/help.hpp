#pragma once

#include <string>

namespace gapforge::cli {

/// Thrown by load_config when --help is given; carries the usage text.
struct HelpRequested {
  std::string text;
};

}  // namespace gapforge::cli
