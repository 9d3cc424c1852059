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

#pragma once

#include <filesystem>
#include <memory>

#include "minilake/catalog.h"
#include "minilake/config.h"
#include "minilake/object_store.h"

namespace minilake {

/// A warehouse directory opened with its configuration: the object store
/// plus a catalog whose retry budget comes from the config.
class Warehouse {
 public:
  /// Reads `<root>/minilake.conf`.
  explicit Warehouse(const std::filesystem::path& root);
  Warehouse(const std::filesystem::path& root, Config config, CommitOptions options = {});

  const Config& config() const { return config_; }
  const ObjectStore& store() const { return *store_; }
  const Catalog& catalog() const { return *catalog_; }

 private:
  Config config_;
  std::shared_ptr<ObjectStore> store_;
  std::unique_ptr<Catalog> catalog_;
};

}  // namespace minilake
