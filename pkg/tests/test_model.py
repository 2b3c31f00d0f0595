import numpy as np
import pytest
import torch

from earthvl.config import LossConfig, ModelConfig
from earthvl.errors import DecodeError, ValidationError
from earthvl.model.attention import ObjectGuidedAttention
from earthvl.model.encoder import ToyEncoder
from earthvl.model.estimator import NumericalEstimator
from earthvl.model.lora import LoRALinear
from earthvl.model.net import EarthVLNet
from earthvl.model.projector import MultiModalProjector
from earthvl.model.vocab import NUM, SPECIALS, Vocab, build_vocab, split_tokens
from earthvl.qa import generate_qa
from earthvl.model.training import build_sample, image_tensor, vocab_for_pairs

TINY = ModelConfig(
    encoder_channels=16,
    mask_embed_channels=4,
    reduction_ratio=4,
    decoder_dim=32,
    decoder_blocks=1,
    decoder_heads=2,
    estimator_dim=16,
    estimator_blocks=1,
    estimator_heads=2,
    lora_rank=2,
    max_answer_len=12,
)


def _default_pairs():
    from earthvl.qa import QAPair

    return [
        QAPair(
            qid="t-bc-building",
            image_id="t",
            qtype="BC",
            question="How many buildings are there in this scene?",
            answer="3",
            numbers=[3],
            meta={},
        )
    ]


def _tiny_net(variant: str = "separated", seed: int = 0, pairs=None) -> EarthVLNet:
    torch.manual_seed(seed)
    loss_cfg = LossConfig(variant=variant, count_vocab=11)
    vocab = vocab_for_pairs(pairs if pairs is not None else _default_pairs(), loss_cfg)
    return EarthVLNet(TINY, loss_cfg, vocab)


# -- encoder -------------------------------------------------------------------


def test_encoder_downsamples_by_32():
    enc = ToyEncoder(channels=16)
    feats, seg = enc(torch.rand(2, 3, 64, 96))
    assert feats.shape == (2, 16, 2, 3)
    assert seg.shape == (2, 8, 64, 96)


def test_encoder_rejects_bad_inputs():
    enc = ToyEncoder()
    with pytest.raises(ValidationError):
        enc(torch.rand(2, 1, 64, 64))
    with pytest.raises(ValidationError):
        enc(torch.rand(2, 3, 60, 64))
    with pytest.raises(ValidationError):
        enc(torch.rand(3, 64, 64))


# -- object-guided attention ----------------------------------------------------


def test_oga_output_shape_and_gates():
    torch.manual_seed(0)
    oga = ObjectGuidedAttention(16, mask_embed_channels=4, reduction_ratio=4)
    feats = torch.rand(2, 16, 4, 4)
    mask = torch.randint(0, 8, (2, 128, 128))
    out = oga(feats, mask)
    assert out.shape == (2, 20, 4, 4)
    gates = oga.gate_values(feats, mask)
    assert gates.shape == (2, 20)
    assert bool((gates > 0).all()) and bool((gates < 1).all())


def test_oga_gates_scale_channels():
    torch.manual_seed(1)
    oga = ObjectGuidedAttention(8, mask_embed_channels=4, reduction_ratio=2).eval()
    feats = torch.rand(1, 8, 4, 4)
    mask = torch.randint(0, 8, (1, 64, 64))
    out = oga(feats, mask)
    gates = oga.gate_values(feats, mask)
    # The feature half of the output is exactly gate * input, channel by channel.
    assert torch.allclose(out[:, :8], feats * gates[:, :8, None, None].reshape(1, 8, 1, 1))


def test_oga_rejects_out_of_table_mask():
    oga = ObjectGuidedAttention(8)
    feats = torch.rand(1, 8, 4, 4)
    with pytest.raises(ValidationError):
        oga(feats, torch.full((1, 32, 32), 255, dtype=torch.long))
    with pytest.raises(ValidationError):
        oga(feats, torch.full((1, 32, 32), 8, dtype=torch.long))
    with pytest.raises(ValidationError):
        oga(feats, torch.zeros(2, 32, 32, dtype=torch.long))  # batch mismatch


def test_oga_mask_changes_output():
    torch.manual_seed(2)
    oga = ObjectGuidedAttention(8, reduction_ratio=2).eval()
    feats = torch.rand(1, 8, 4, 4)
    out_bg = oga(feats, torch.zeros(1, 32, 32, dtype=torch.long))
    out_water = oga(feats, torch.full((1, 32, 32), 3, dtype=torch.long))
    assert not torch.allclose(out_bg, out_water)


# -- LoRA ------------------------------------------------------------------------


def test_lora_zero_init_matches_base_bitwise():
    torch.manual_seed(3)
    layer = LoRALinear(12, 8, rank=4)
    x = torch.randn(5, 12)
    assert torch.equal(layer(x), layer.base(x))


def test_lora_becomes_active_when_b_nonzero():
    torch.manual_seed(4)
    layer = LoRALinear(12, 8, rank=4, alpha=16.0)
    x = torch.randn(5, 12)
    with torch.no_grad():
        layer.lora_b.fill_(0.01)
    expected = layer.base(x) + x @ layer.delta_weight().T
    assert torch.allclose(layer(x), expected, atol=1e-6)
    assert torch.allclose(
        layer.delta_weight(), (16.0 / 4) * layer.lora_a @ layer.lora_b
    )


def test_lora_rank_zero_is_plain_frozen_linear():
    layer = LoRALinear(6, 6, rank=0)
    assert layer.delta_weight().abs().sum() == 0
    assert [n for n, p in layer.named_parameters() if p.requires_grad] == []
    with pytest.raises(ValidationError):
        LoRALinear(6, 6, rank=-1)


def test_lora_base_frozen_adapters_trainable():
    layer = LoRALinear(6, 6, rank=2)
    trainable = {n for n, p in layer.named_parameters() if p.requires_grad}
    assert trainable == {"lora_a", "lora_b"}


# -- projector / estimator --------------------------------------------------------


def test_projector_flattens_grid_to_tokens():
    proj = MultiModalProjector(20, 32)
    out = proj(torch.rand(2, 20, 2, 3))
    assert out.shape == (2, 6, 32)


def test_estimator_shapes_and_padding():
    torch.manual_seed(5)
    est = NumericalEstimator(decoder_dim=32, dim=16, blocks=1, heads=2, count_vocab=11)
    fractions = torch.rand(2, 8)
    states = torch.rand(2, 3, 32)
    out = est(fractions, states)
    assert out.shape == (2, 3, 11)
    pad = torch.tensor([[False, True, True], [False, False, True]])
    out_pad = est(fractions, states, pad)
    assert out_pad.shape == (2, 3, 11)
    with pytest.raises(ValidationError):
        est(fractions, torch.rand(2, 32))
    with pytest.raises(ValidationError):
        NumericalEstimator(decoder_dim=32, count_vocab=1)


# -- vocab -------------------------------------------------------------------------


def test_vocab_specials_first_and_sorted_tail():
    v = build_vocab(["how many?"], ["There are <num> buildings."])
    assert tuple(v.words[:5]) == SPECIALS
    tail = v.words[5:]
    assert tail == sorted(tail)


def test_vocab_masked_num_token_not_duplicated():
    # Masked corpora contain the <num> placeholder textually; it must collapse
    # onto the special, not appear twice.
    v = build_vocab([], ["There are <num> buildings."])
    assert v.words.count(NUM) == 1


def test_vocab_for_pairs_masks_only_counting_answers(cross_mask):
    pairs = generate_qa(cross_mask, image_id="img")
    v = vocab_for_pairs(pairs, LossConfig(variant="separated", count_vocab=11))
    # Area-bin surface words survive verbatim; counting digits do not.
    assert "(10%," in v.words and "20%]" in v.words
    assert not any(NUM in w for w in v.words[5:])
    assert "0" not in v.words  # BC answers masked away


def test_vocab_duplicate_words_rejected():
    with pytest.raises(ValidationError):
        Vocab(words=list(SPECIALS) + ["a", "a"])
    with pytest.raises(ValidationError):
        Vocab(words=["a", "b"])  # specials missing


def test_vocab_unknown_maps_to_unk():
    v = build_vocab(["hello"], ["world"])
    ids = v.encode(["hello", "zebra"])
    assert ids[1] == v.unk_id
    assert v.decode(ids) == ["hello", "<unk>"]


def test_vocab_number_word_ids_in_value_order():
    v = build_vocab([], ["there are 2"], include_counts_to=3)
    ids = v.number_word_ids(3)
    assert [v.words[i] for i in ids] == ["0", "1", "2"]
    with pytest.raises(ValidationError):
        v.number_word_ids(5)  # 3 and 4 never entered the vocabulary


# -- full network -------------------------------------------------------------------


def test_net_decoder_base_frozen_adapters_trainable():
    net = _tiny_net()
    for name, p in net.blocks.named_parameters():
        if "lora_a" in name or "lora_b" in name:
            assert p.requires_grad, name
        else:
            assert not p.requires_grad, name
    assert all(not p.requires_grad for p in net.ln_f.parameters())
    assert net.embed.weight.requires_grad
    assert net.lm_head.weight.requires_grad


def test_net_zero_adapters_match_adapter_free_forward():
    # With B = 0 the adapter contribution vanishes, so hidden states equal
    # what the frozen trunk alone computes.
    net = _tiny_net(seed=11).eval()
    vis = torch.rand(1, 4, TINY.decoder_dim)
    tokens = torch.randint(0, len(net.vocab), (1, 6))
    hidden_a, logits_a = net.forward_sequence(vis, tokens)
    with torch.no_grad():
        for name, p in net.blocks.named_parameters():
            if "lora_a" in name:
                p.normal_()  # perturbing A alone changes nothing while B = 0
    hidden_b, logits_b = net.forward_sequence(vis, tokens)
    assert torch.equal(hidden_a, hidden_b)
    assert torch.equal(logits_a, logits_b)
    with torch.no_grad():
        for name, p in net.blocks.named_parameters():
            if "lora_b" in name:
                p.fill_(0.05)
    hidden_c, _ = net.forward_sequence(vis, tokens)
    assert not torch.equal(hidden_a, hidden_c)


def test_net_sequence_length_guard():
    net = _tiny_net()
    vis = torch.rand(1, 4, TINY.decoder_dim)
    with pytest.raises(ValidationError):
        net.forward_sequence(vis, torch.zeros(1, 200, dtype=torch.long))


def test_net_shared_variant_has_no_estimator():
    assert _tiny_net("shared").estimator is None
    assert _tiny_net("separated").estimator is not None


def test_greedy_answer_deterministic(cross_mask):
    pairs = generate_qa(cross_mask, image_id="img")
    net = _tiny_net(pairs=pairs, seed=21)
    img = image_tensor(cross_mask)
    gt = torch.from_numpy(cross_mask.grid.astype(np.int64))
    a1 = net.greedy_answer(img, pairs[0].question, gt_mask=gt)
    a2 = net.greedy_answer(img, pairs[0].question, gt_mask=gt)
    assert a1 == a2
    assert isinstance(a1, str)
    assert NUM not in a1  # separated route restores placeholders


def test_greedy_answer_batched_and_unbatched_inputs_agree(cross_mask):
    pairs = generate_qa(cross_mask, image_id="img")
    net = _tiny_net(pairs=pairs, seed=22)
    img = image_tensor(cross_mask)
    gt = torch.from_numpy(cross_mask.grid.astype(np.int64))
    a = net.greedy_answer(img, pairs[3].question, gt_mask=gt)
    b = net.greedy_answer(img.unsqueeze(0), pairs[3].question, gt_mask=gt.unsqueeze(0))
    assert a == b


def test_encode_scene_fractions_sum_to_one(cross_mask):
    net = _tiny_net(seed=23)
    img = image_tensor(cross_mask).unsqueeze(0)
    gt = torch.from_numpy(cross_mask.grid.astype(np.int64)).unsqueeze(0)
    vis, mask, fractions = net.encode_scene(img, gt)
    assert vis.shape == (1, 4, TINY.decoder_dim)  # 64x64 -> 2x2 grid
    assert torch.equal(mask, gt)
    assert fractions.shape == (1, 8)
    assert fractions.sum().item() == pytest.approx(1.0)


def test_encode_scene_pseudo_mask_when_no_gt(cross_mask):
    net = _tiny_net(seed=24)
    img = image_tensor(cross_mask).unsqueeze(0)
    vis, mask, _ = net.encode_scene(img)
    assert mask.shape == (1, 64, 64)
    assert int(mask.max()) <= 7 and int(mask.min()) >= 0


def test_encode_scene_rejects_mismatched_gt(cross_mask):
    net = _tiny_net(seed=25)
    img = image_tensor(cross_mask).unsqueeze(0)
    with pytest.raises(ValidationError):
        net.encode_scene(img, torch.zeros(1, 32, 32, dtype=torch.long))
