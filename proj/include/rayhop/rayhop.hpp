#pragma once

#include "rayhop/csv.hpp"
#include "rayhop/domain.hpp"
#include "rayhop/errors.hpp"
#include "rayhop/parallel.hpp"
#include "rayhop/ray_tracer.hpp"
#include "rayhop/reconstructor.hpp"
#include "rayhop/scene.hpp"
#include "rayhop/speed_field.hpp"
#include "rayhop/tracker.hpp"
#include "rayhop/vec3.hpp"
