#pragma once

#include "sonowork/error.hpp"
#include "sonowork/ingest.hpp"
#include "sonowork/transform.hpp"
#include "sonowork/synth.hpp"
#include "sonowork/wav.hpp"
#include "sonowork/plot.hpp"
#include "sonowork/pipeline.hpp"
#include "sonowork/training.hpp"
#include "sonowork/i18n.hpp"
