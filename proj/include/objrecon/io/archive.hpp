#pragma once

#include <iosfwd>
#include <string>

#include "objrecon/field/model.hpp"

namespace objrecon::io {

/// Single-file model container: a text header (format version, grid config,
/// MLP layer sizes, box transform, frozen flags, tensor directory) followed
/// by named little-endian float32 tensors. Optimizer moments are stored when
/// with_optimizer_state. Loading then saving reproduces the bytes exactly.
void save_model(const field::ObjectModel& model, const std::string& path,
                bool with_optimizer_state = true);
void save_model(const field::ObjectModel& model, std::ostream& out,
                bool with_optimizer_state = true);

field::ObjectModel load_model(const std::string& path);
field::ObjectModel load_model(std::istream& in);

}  // namespace objrecon::io
