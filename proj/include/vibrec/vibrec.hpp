// Copyright 2026 The vibrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "vibrec/baselines.hpp"
#include "vibrec/dsp.hpp"
#include "vibrec/error.hpp"
#include "vibrec/extraction.hpp"
#include "vibrec/fft.hpp"
#include "vibrec/io/config.hpp"
#include "vibrec/io/json_io.hpp"
#include "vibrec/io/vgrid.hpp"
#include "vibrec/io/wav.hpp"
#include "vibrec/metrics.hpp"
#include "vibrec/modal.hpp"
#include "vibrec/pipeline.hpp"
#include "vibrec/recovery.hpp"
#include "vibrec/signals.hpp"
#include "vibrec/types.hpp"
