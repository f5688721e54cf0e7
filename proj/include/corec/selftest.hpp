#pragma once

#include <optional>
#include <ostream>
#include <string>

namespace corec {

// Runs the built-in oracle suite (coboundary squares to zero, the
// last-slot homotopy identity, the quadratic almost-cocycle bound,
// chart roundtrips, BCH order, Haar invariance/closure, and the Cayley
// axiom checker), printing one timed pass/fail line per oracle.
// Optionally also validates a user-supplied Cayley table JSON file.
// Returns true iff every oracle passed.
bool run_selftest(std::ostream& out,
                  const std::optional<std::string>& cayley_path = {});

}  // namespace corec
