#pragma once

#include "omnitopo/angles.hpp"
#include "omnitopo/chassis.hpp"
#include "omnitopo/classify.hpp"
#include "omnitopo/dbscan.hpp"
#include "omnitopo/ellipse_fit.hpp"
#include "omnitopo/errors.hpp"
#include "omnitopo/manifold.hpp"
#include "omnitopo/optimizer.hpp"
#include "omnitopo/phase_topology.hpp"
#include "omnitopo/serialization.hpp"
#include "omnitopo/star_polygon.hpp"
#include "omnitopo/symmetry.hpp"
#include "omnitopo/trajectory.hpp"
#include "omnitopo/wrench.hpp"
