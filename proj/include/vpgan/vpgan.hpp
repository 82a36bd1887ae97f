// Copyright 2026 The vpgan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Umbrella header for the vpgan library.

#ifndef VPGAN_VPGAN_HPP
#define VPGAN_VPGAN_HPP

#include "vpgan/adam.hpp"
#include "vpgan/anonymizer.hpp"
#include "vpgan/checkpoint.hpp"
#include "vpgan/corpus.hpp"
#include "vpgan/errors.hpp"
#include "vpgan/manifest.hpp"
#include "vpgan/metrics.hpp"
#include "vpgan/network.hpp"
#include "vpgan/ot.hpp"
#include "vpgan/privacy.hpp"
#include "vpgan/projection.hpp"
#include "vpgan/report.hpp"
#include "vpgan/rng.hpp"
#include "vpgan/svg.hpp"
#include "vpgan/tensor.hpp"
#include "vpgan/trainer.hpp"

#endif  // VPGAN_VPGAN_HPP
