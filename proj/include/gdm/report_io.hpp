#pragma once

#include <string>

#include "gdm/scenarios.hpp"

namespace gdm {

// Canonical line-delimited metrics: one "epoch" record per trial and epoch,
// one "epoch_mean" aggregate per epoch, and a closing "summary" line. Every
// field is deterministic for a given run configuration (wall-clock timings are
// reported elsewhere), so reruns produce byte-identical files.
std::string metrics_jsonl_string(const ScenarioReport& report);

void write_metrics_jsonl(const std::string& path, const ScenarioReport& report);

}  // namespace gdm
