#pragma once

#include "deltaforge/error.hpp"
#include "deltaforge/hyperdual.hpp"
#include "deltaforge/expression.hpp"
#include "deltaforge/spaceform.hpp"
#include "deltaforge/immersion.hpp"
#include "deltaforge/catalog.hpp"
#include "deltaforge/spec_document.hpp"
#include "deltaforge/jet.hpp"
#include "deltaforge/extrinsic.hpp"
#include "deltaforge/curvature.hpp"
#include "deltaforge/delta.hpp"
#include "deltaforge/report.hpp"
