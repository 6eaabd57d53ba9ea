#pragma once

#include <string>
#include <vector>

#include "deid/identity.hpp"
#include "deid/oks.hpp"
#include "deid/report.hpp"

namespace deid::svg {

std::string roc_curve(const RocCurve& roc);

// One histogram panel per method.
std::string oks_histograms(const std::vector<MethodEval>& methods);

// 17 panels, one per COCO keypoint.
std::string keypoint_histograms(const std::string& method, const KeypointHistograms& hist);

std::string embedding(const std::vector<EmbeddedDescriptor>& points);

}  // namespace deid::svg
