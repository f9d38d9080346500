#pragma once

#include <string>

#include "gdm/gdm_model.hpp"

namespace gdm {

// Versioned binary snapshot of a full dual-memory model: configuration, both
// network dumps (weights, contexts, habituation, label tables, edges with
// ages, temporal links, global context, online input statistics). Doubles are
// stored as raw IEEE-754 bits, so save/load round-trips are lossless and the
// byte stream is deterministic for identical state.
void save_model(const std::string& path, const GdmModel& model);

GdmModel load_model(const std::string& path);

// Size of one network's block in the snapshot encoding, without writing it.
std::uint64_t serialized_net_bytes(const GammaGwrNet& net);

}  // namespace gdm
