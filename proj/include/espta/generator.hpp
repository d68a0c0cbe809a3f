#pragma once

#include <string>

#include "espta/ir.hpp"

// Seeded random programs spanning the library behaviors the properties
// quantify over: no-ops, returning a parameter, returning a fresh object,
// storing a parameter into a receiver field, and loading a receiver field.
namespace espta::generator {

struct GenOptions {
  int max_branches = 3;          // per program; keeps enumeration small
  bool allow_shared_fields = false;  // program code may touch library fields
  bool with_callbacks = false;       // add an override function the library calls
};

std::string generate_program_text(unsigned long long seed,
                                  const GenOptions& options = {});

// Parsed and, when shared fields were allowed, rewritten to a clean bundle.
ir::ProgramBundle generate_program(unsigned long long seed,
                                   const GenOptions& options = {});

}  // namespace espta::generator
