/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.  See the NOTICE file
 * distributed with this work for additional information
 * regarding copyright ownership.  The ASF licenses this file
 * to you under the Apache License, Version 2.0 (the
 * "License"); you may not use this file except in compliance
 * with the License.  You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an
 * "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, either express or implied.  See the License for the
 * specific language governing permissions and limitations
 * under the License.
 */

#include "minilake/warehouse.h"

namespace minilake {

Warehouse::Warehouse(const std::filesystem::path& root)
    : Warehouse(root, LoadConfig(root)) {}

Warehouse::Warehouse(const std::filesystem::path& root, Config config, CommitOptions options)
    : config_(std::move(config)), store_(std::make_shared<ObjectStore>(root)) {
  options.max_retries = config_.max_retries;
  catalog_ = std::make_unique<Catalog>(store_, std::move(options));
}

}  // namespace minilake
