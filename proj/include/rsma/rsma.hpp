// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Umbrella header.

#include "rsma/fbl.hpp"
#include "rsma/channel.hpp"
#include "rsma/scheme.hpp"
#include "rsma/reliability.hpp"
#include "rsma/region.hpp"
#include "rsma/margin_barrier.hpp"
#include "rsma/linearization.hpp"
#include "rsma/blocklength_solver.hpp"
#include "rsma/oracle.hpp"
#include "rsma/scenario.hpp"
#include "rsma/experiments.hpp"
