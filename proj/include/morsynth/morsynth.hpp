#pragma once

#include "blend.hpp"
#include "config.hpp"
#include "domain.hpp"
#include "error.hpp"
#include "io.hpp"
#include "manifest.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "procedural.hpp"
#include "quality_report.hpp"
#include "rain_model.hpp"
#include "random.hpp"
#include "raster.hpp"
#include "rgf.hpp"
