#pragma once

#include "thermstack/analysis.hpp"
#include "thermstack/assemble.hpp"
#include "thermstack/colormap.hpp"
#include "thermstack/floorplan.hpp"
#include "thermstack/formats.hpp"
#include "thermstack/mesh.hpp"
#include "thermstack/pipeline.hpp"
#include "thermstack/report_io.hpp"
#include "thermstack/solver.hpp"
#include "thermstack/sparse.hpp"
#include "thermstack/types.hpp"
