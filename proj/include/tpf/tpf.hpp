// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tpf/artifacts.hpp"
#include "tpf/container.hpp"
#include "tpf/error.hpp"
#include "tpf/extract.hpp"
#include "tpf/filters.hpp"
#include "tpf/fit.hpp"
#include "tpf/kdtree.hpp"
#include "tpf/marching_cubes.hpp"
#include "tpf/mesh.hpp"
#include "tpf/mesh_io.hpp"
#include "tpf/metrics.hpp"
#include "tpf/parallel.hpp"
#include "tpf/pipeline.hpp"
#include "tpf/rng.hpp"
#include "tpf/shapes.hpp"
#include "tpf/triplane.hpp"
#include "tpf/vec3.hpp"
