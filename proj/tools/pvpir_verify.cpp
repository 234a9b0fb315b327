// Copyright 2026 The PVPIR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Third-party verifier. Reads only public files: the public key, the
// verification key and the answer set. Prints ACCEPT (exit 0) or REJECT
// (exit 1); unreadable input exits 2.

#include <iostream>
#include <string_view>

#include "pvpir/transport.hpp"
#include "pvpir/wire.hpp"

int main(int argc, char** argv) {
  if (argc != 4) {
    std::cerr << "usage: pvpir_verify PK_FILE VK_FILE ANSWERS_FILE\n";
    return 2;
  }
  namespace files = pvpir::wire::files;
  try {
    auto pk = pvpir::wire::decode_public_key(files::read(argv[1], files::kPublicKeyMagic));
    auto vk = pvpir::wire::decode_verification_key(files::read(argv[2], files::kVerificationKeyMagic));
    auto answers = pvpir::transport::decode_answer_set(files::read(argv[3], files::kAnswerMagic), pk);
    const bool ok = pvpir::transport::verify_standalone(answers, pk, vk);
    std::cout << (ok ? "ACCEPT" : "REJECT") << '\n';
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
