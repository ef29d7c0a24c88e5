// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wgcd/adapt.hpp"
#include "wgcd/assembly.hpp"
#include "wgcd/bench.hpp"
#include "wgcd/dofmap.hpp"
#include "wgcd/estimator.hpp"
#include "wgcd/linsolve.hpp"
#include "wgcd/mesh.hpp"
#include "wgcd/poly.hpp"
#include "wgcd/problem.hpp"
#include "wgcd/types.hpp"
#include "wgcd/weakops.hpp"
