// Copyright 2026 The eegfp Authors.
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


#pragma once

// EDF ingest and dataset catalog
#include "eegfp/edf.hpp"
#include "eegfp/dataset.hpp"

// Signal processing and connectivity features
#include "eegfp/dsp.hpp"
#include "eegfp/connectivity.hpp"

// Verification scoring
#include "eegfp/biometric.hpp"

// Synthetic generators and the experiment sweep
#include "eegfp/synthkit.hpp"
#include "eegfp/pipeline.hpp"
#include "eegfp/selftest.hpp"
