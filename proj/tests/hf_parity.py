#!/usr/bin/env python3
# Copyright 2026 The sgdst Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Compares the C++ encoder with the transformers BERT implementation.

A small randomly initialised BertModel is exported with tools/export_bert.py
and both implementations encode the same inputs. Exits 77 (skipped) when
torch or transformers is unavailable.

    hf_parity.py <encoder_states binary> <tools dir>
"""

import json
import os
import subprocess
import sys
import tempfile

SKIP = 77
TOLERANCE = 1e-4  # float32 reference against float64 recomputation


def main(binary, tools_dir):
    try:
        import torch
        from transformers import BertConfig, BertModel
    except ImportError as e:
        print(f"skipped: {e}")
        return SKIP
    sys.path.insert(0, tools_dir)
    import export_bert

    torch.manual_seed(0)
    config = BertConfig(vocab_size=60, hidden_size=32, num_hidden_layers=2,
                        num_attention_heads=4, intermediate_size=64,
                        max_position_embeddings=40, hidden_act="gelu")
    model = BertModel(config, add_pooling_layer=False)
    model.eval()
    # Non-trivial LayerNorm and bias values so every tensor is exercised.
    with torch.no_grad():
        for name, p in model.named_parameters():
            if name.endswith("bias") or "LayerNorm" in name:
                p.add_(0.1 * torch.randn_like(p))

    cases = [
        ([2, 17, 33, 5, 3, 41, 8, 3], [0, 0, 0, 0, 0, 1, 1, 1], [1] * 8),
        ([2, 9, 9, 9, 3, 0, 0], [0, 0, 0, 0, 0, 0, 0], [1, 1, 1, 1, 1, 0, 0]),
    ]
    worst = 0.0
    with tempfile.TemporaryDirectory() as tmp:
        export_bert.export(model, tmp)
        for ids, segments, mask in cases:
            with torch.no_grad():
                ref = model(input_ids=torch.tensor([ids]),
                            token_type_ids=torch.tensor([segments]),
                            attention_mask=torch.tensor([mask])).last_hidden_state[0]
            args = [binary, tmp, str(config.vocab_size)] + [
                ",".join(map(str, x)) for x in (ids, segments, mask)]
            out = subprocess.run(args, check=True, capture_output=True, text=True)
            got = torch.tensor(json.loads(out.stdout), dtype=torch.float64)
            # Padded positions carry no meaning; compare the visible ones.
            keep = torch.tensor(mask, dtype=torch.bool)
            diff = (got[keep] - ref.double()[keep]).abs().max().item()
            worst = max(worst, diff)
    print(f"max abs difference {worst:.3e} (tolerance {TOLERANCE:.0e})")
    return 0 if worst < TOLERANCE else 1


if __name__ == "__main__":
    if len(sys.argv) != 3:
        print(__doc__)
        sys.exit(2)
    sys.exit(main(os.path.abspath(sys.argv[1]), os.path.abspath(sys.argv[2])))
