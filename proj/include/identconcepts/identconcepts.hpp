// Copyright 2026 The identconcepts Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef IDENTCONCEPTS_IDENTCONCEPTS_HPP
#define IDENTCONCEPTS_IDENTCONCEPTS_HPP

#include "identconcepts/discovery.hpp"
#include "identconcepts/encoder.hpp"
#include "identconcepts/generators.hpp"
#include "identconcepts/harness.hpp"
#include "identconcepts/metrics.hpp"
#include "identconcepts/numerics.hpp"
#include "identconcepts/random.hpp"
#include "identconcepts/sampling.hpp"
#include "identconcepts/serialization.hpp"

#endif  // IDENTCONCEPTS_IDENTCONCEPTS_HPP
