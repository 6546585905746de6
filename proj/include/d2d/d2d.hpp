#pragma once

// Everything: archive ingest, analyzers, DIDL emission, timing and the pipeline.

#include "d2d/analyzers.hpp"
#include "d2d/archive.hpp"
#include "d2d/builtins.hpp"
#include "d2d/didl.hpp"
#include "d2d/digest.hpp"
#include "d2d/error.hpp"
#include "d2d/framework.hpp"
#include "d2d/magic.hpp"
#include "d2d/model.hpp"
#include "d2d/pipeline.hpp"
#include "d2d/registry.hpp"
#include "d2d/schema.hpp"
#include "d2d/text.hpp"
#include "d2d/timing.hpp"
#include "d2d/xml.hpp"
