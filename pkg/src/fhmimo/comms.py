"""Constellations and the data path: modulate, reconstruct, resolve, demod.

Information rides the waveform two ways per hop: the choice of which M of
the K sub-bands are active (a combination index, floor(log2 C(K,M)) bits)
and a J-bit PSK phase on each antenna's tone (M*J bits).  Either alone or
both combined form the three schemes handled here.

On the receive side the frame was sampled with a whole-sample offset, so a
data hop straddles two receiver hops.  Re-gluing the straddled pieces for a
hypothesised offset restores a pure tone block when the hypothesis is right;
wrong hypotheses (the rotator angle only pins the offset modulo K/B) leak
energy into unused sub-band bins, which is what the resolver scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import RadarConfig
from .errors import ConfigError, OutOfRange
from .rx_frontend import detect_and_pair
from .timing import wrap_angle
from .waveform import HopSchedule, frame_schedule

__all__ = [
    "FhcsCodebook",
    "DemodReference",
    "DemodResult",
    "psk_phases",
    "psk_words",
    "pack_bits",
    "unpack_bits",
    "bits_per_hop",
    "gross_rate",
    "net_rate",
    "modulate_frame",
    "reconstruct_hop",
    "resolve_ambiguity",
    "demod_frame",
]


# -- combination codebook --------------------------------------------------


@dataclass(frozen=True)
class FhcsCodebook:
    """Bijection between bit words and ascending M-subsets of [0, K).

    Subsets are ranked lexicographically (combinatorial number system) and
    the codebook keeps the first 2^bits of them, bits = floor(log2 C(K,M));
    decoding a subset ranked beyond that raises OutOfRange, which demod
    treats as an erasure.
    """

    antennas: int
    subbands: int

    @property
    def bits(self) -> int:
        return int(math.floor(math.log2(math.comb(self.subbands, self.antennas))))

    def encode(self, word: int) -> np.ndarray:
        """word -> ascending sub-band row (lexicographic unranking)."""
        if not 0 <= word < 2**self.bits:
            raise OutOfRange(f"word {word} needs more than {self.bits} bits")
        M, K = self.antennas, self.subbands
        row = np.empty(M, dtype=int)
        r, start = word, 0
        for i in range(M):
            for v in range(start, K):
                block = math.comb(K - 1 - v, M - 1 - i)
                if r < block:
                    row[i] = v
                    start = v + 1
                    break
                r -= block
        return row

    def decode(self, row) -> int:
        """ascending sub-band row -> word (lexicographic ranking)."""
        row = np.asarray(row, dtype=int)
        M, K = self.antennas, self.subbands
        if row.size != M or np.any(np.diff(row) <= 0):
            raise ConfigError("row must be a strictly increasing M-subset")
        rank, prev = 0, -1
        for i, c in enumerate(row):
            for v in range(prev + 1, int(c)):
                rank += math.comb(K - 1 - v, M - 1 - i)
            prev = int(c)
        if rank >= 2**self.bits:
            raise OutOfRange(f"subset rank {rank} outside the {self.bits}-bit codebook")
        return rank


# -- PSK helpers -----------------------------------------------------------


def psk_phases(words, j_bits: int) -> np.ndarray:
    """Natural-binary words -> phases {2*pi*w/2^J}."""
    return 2 * np.pi * np.asarray(words) / 2**j_bits


def psk_words(phases, j_bits: int) -> np.ndarray:
    """Nearest-point slicing back to natural-binary words."""
    n = 2**j_bits
    return np.round(np.asarray(phases) * n / (2 * np.pi)).astype(int) % n


def pack_bits(bits) -> bytes:
    """0/1 array -> bytes, MSB first, zero-padded at the tail."""
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def unpack_bits(data: bytes, n_bits: int) -> np.ndarray:
    out = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    if out.size < n_bits:
        raise ConfigError(f"need {n_bits} bits, file holds {out.size}")
    return out[:n_bits]


def _words_from_bits(bits, width: int) -> np.ndarray:
    """Consecutive width-bit groups -> ints, MSB first."""
    b = np.asarray(bits, dtype=int).reshape(-1, width)
    return b @ (1 << np.arange(width - 1, -1, -1))


def _bits_from_words(words, width: int) -> np.ndarray:
    w = np.asarray(words, dtype=int)[:, None]
    return ((w >> np.arange(width - 1, -1, -1)) & 1).ravel()


# -- rates -----------------------------------------------------------------


def bits_per_hop(cfg: RadarConfig, scheme: str, j_bits: int = 1) -> int:
    fhcs = FhcsCodebook(cfg.antennas, cfg.subbands).bits
    if scheme == "psk":
        return cfg.antennas * j_bits
    if scheme == "fhcs":
        return fhcs
    if scheme == "pfhcs":
        return fhcs + cfg.antennas * j_bits
    raise ConfigError(f"unknown scheme: {scheme!r}")


def gross_rate(cfg: RadarConfig, scheme: str, j_bits: int = 1) -> float:
    """Payload bits per hop over the hop duration, in bit/s."""
    return bits_per_hop(cfg, scheme, j_bits) / cfg.hop_duration


def net_rate(cfg: RadarConfig, scheme: str, j_bits: int = 1, overhead_hops: int = 2) -> float:
    """Gross rate discounted by pilot/probe hops over the whole frame."""
    data = cfg.hops - overhead_hops
    if data <= 0:
        raise ConfigError("no data hops left after overhead")
    return bits_per_hop(cfg, scheme, j_bits) * data / (cfg.hops * cfg.hop_duration)


# -- modulation ------------------------------------------------------------


def modulate_frame(
    bits,
    cfg: RadarConfig,
    pilot,
    scheme: str = "pfhcs",
    j_bits: int = 1,
):
    """Fill a frame schedule with payload bits.

    Hops 0 and 1 carry the pilot; every later hop carries one scheme symbol.
    Combination bits pick the hop's ascending sub-band row (PSK-only schemes
    reuse the pilot row), then each antenna's tone gets its PSK phase.
    Returns (schedule, bits_consumed); short payloads are zero-padded.
    """
    cfg.validate()
    pilot = np.asarray(pilot, dtype=int)
    data_hops = range(2, cfg.hops)
    need = bits_per_hop(cfg, scheme, j_bits) * len(data_hops)
    bits = np.asarray(bits, dtype=int).ravel()
    if bits.size < need:
        bits = np.concatenate([bits, np.zeros(need - bits.size, dtype=int)])
    used = 0
    book = FhcsCodebook(cfg.antennas, cfg.subbands)
    sub = np.tile(pilot, (cfg.hops, 1))
    mod = np.ones((cfg.hops, cfg.antennas), dtype=complex)
    for h in data_hops:
        if scheme in ("fhcs", "pfhcs"):
            word = int(_words_from_bits(bits[used : used + book.bits], book.bits)[0])
            sub[h] = book.encode(word)
            used += book.bits
        if scheme in ("psk", "pfhcs"):
            words = _words_from_bits(
                bits[used : used + cfg.antennas * j_bits], j_bits
            )
            mod[h] = np.exp(1j * psk_phases(words, j_bits))
            used += cfg.antennas * j_bits
    sched = HopSchedule(sub, mod)
    return frame_schedule(sched, pilot), need


# -- receive side ----------------------------------------------------------


def reconstruct_hop(frame, h: int, l_eta_hat: int) -> np.ndarray:
    """Re-glue transmit hop h from the straddled receiver hops h-1 and h.

    Takes the last l_eta_hat samples of receiver hop h-1 followed by the
    first L - l_eta_hat samples of receiver hop h; with the right offset the
    result is a pure tone block whose residual phase is only the sub-sample
    remainder.
    """
    L = frame.cfg.samples_per_hop
    if not 1 <= h < frame.hops:
        raise ConfigError("reconstruction needs a preceding receiver hop")
    if not 0 <= l_eta_hat < L:
        raise ConfigError("whole-sample offset must lie in [0, L)")
    lo = h * L - l_eta_hat
    return frame.samples[lo : lo + L]


def _offbin_stat(mags: np.ndarray, k_top: np.ndarray, cfg: RadarConfig, single: bool):
    """Noise reference from unused sub-band bins (mean, or first-M literal)."""
    unused = np.setdiff1d(np.arange(cfg.subbands), k_top)
    if single:
        unused = unused[: cfg.antennas]
    return float(np.mean(mags[unused]))


def resolve_ambiguity(
    frame,
    l_eta_candidates,
    cfg: RadarConfig,
    data_hops=None,
    single_offbin: bool = False,
) -> int:
    """Pick the offset candidate whose reconstructions stay on-grid.

    Scores each candidate by the summed per-hop ratio of detected-peak
    magnitude to off-bin magnitude; the true offset leaves the off bins at
    the noise floor while wrong ones leak tone energy into them.  Returns
    the winning candidate's index.  The off-bin reference averages all
    unused sub-band bins by default; ``single_offbin`` restricts it to the
    first M unused sub-bands (the literal one-bin-per-antenna rule).
    """
    cands = np.atleast_1d(np.asarray(l_eta_candidates, dtype=int))
    if cands.size == 1:
        return 0
    if data_hops is None:
        data_hops = range(2, frame.hops)
    grid = cfg.grid_bins()
    scores = np.zeros(cands.size)
    for ci, l_hat in enumerate(cands):
        # an offset rounding into the next hop cannot be re-glued from this
        # frame's windows; it can only be a wrong candidate, so rank it last
        if not 0 <= l_hat < cfg.samples_per_hop:
            scores[ci] = -np.inf
            continue
        total = 0.0
        for h in data_hops:
            spec = np.fft.fft(reconstruct_hop(frame, h, int(l_hat)))
            mags = np.abs(spec[grid])
            k_top = np.sort(np.argsort(mags)[::-1][: cfg.antennas])
            peak = float(np.sum(mags[k_top]))
            off = _offbin_stat(mags, k_top, cfg, single_offbin)
            total += peak / (off + 1e-9 * peak / cfg.antennas + 1e-300)
        scores[ci] = total
    return int(np.argmax(scores))


@dataclass
class DemodReference:
    """Everything demodulation needs from the estimation stage.

    ``rotator_angle`` is the per-sub-band phase left after re-gluing with
    ``l_eta``: the glued tone block still rotates by the sub-sample
    remainder, angle = wrap(-2*pi*B*(eta_hat - l_eta*T_s)/K) per sub-band
    step.  With a zero whole-sample offset it equals the pilot rotator angle
    itself.  ``equalizer`` (per-antenna composite gains) replaces the
    gain-plus-steering model in scatter-rich channels.
    """

    l_eta: int
    rotator_angle: float
    u_hat: float = 0.0
    beta_comp: complex = 1.0 + 0.0j
    equalizer: np.ndarray | None = None

    @classmethod
    def from_eta(
        cls,
        eta_hat: float,
        u_hat: float,
        beta_comp: complex,
        cfg: RadarConfig,
        equalizer=None,
    ):
        l_eta = int(round(eta_hat / cfg.sample_period))
        frac = eta_hat - l_eta * cfg.sample_period
        ang = float(wrap_angle(-2 * np.pi * cfg.bandwidth * frac / cfg.subbands))
        return cls(
            l_eta=l_eta,
            rotator_angle=ang,
            u_hat=u_hat,
            beta_comp=beta_comp,
            equalizer=None if equalizer is None else np.asarray(equalizer, dtype=complex),
        )


@dataclass
class DemodResult:
    bits: np.ndarray  # recovered payload bits, concatenated over data hops
    comb_words: np.ndarray  # per-hop combination words (-1 on erasure)
    psk_word_rows: np.ndarray  # per-hop PSK words, (n_hops, M) or empty
    erasures: np.ndarray  # bool per data hop
    k_rows: np.ndarray  # detected ascending sub-band rows


def demod_frame(
    frame,
    ref: DemodReference,
    cfg: RadarConfig,
    scheme: str = "pfhcs",
    j_bits: int = 1,
    data_hops=None,
) -> DemodResult:
    """Recover payload bits from the re-glued data hops.

    Per hop: detect the M active sub-bands (combination sub-symbol), then
    strip gain, steering and the residual rotator off each detected tone and
    slice its phase to the PSK grid.  Combination erasures (subset outside
    the codebook) contribute zero filler bits and are flagged.
    """
    if data_hops is None:
        data_hops = range(2, frame.hops)
    data_hops = list(data_hops)
    book = FhcsCodebook(cfg.antennas, cfg.subbands)
    m = np.arange(cfg.antennas)
    bits_out = []
    comb_words = np.full(len(data_hops), -1, dtype=int)
    psk_rows = np.zeros((len(data_hops), cfg.antennas), dtype=int)
    erasures = np.zeros(len(data_hops), dtype=bool)
    k_rows = np.zeros((len(data_hops), cfg.antennas), dtype=int)
    for i, h in enumerate(data_hops):
        spec = np.fft.fft(reconstruct_hop(frame, h, ref.l_eta))
        k_hat, amps = detect_and_pair(spec, cfg, margin_db=-np.inf)
        k_rows[i] = k_hat
        if scheme in ("fhcs", "pfhcs"):
            try:
                word = book.decode(k_hat)
                comb_words[i] = word
                bits_out.append(_bits_from_words([word], book.bits))
            except OutOfRange:
                erasures[i] = True
                bits_out.append(np.zeros(book.bits, dtype=int))
        if scheme in ("psk", "pfhcs"):
            if ref.equalizer is not None:
                flat = amps / ref.equalizer
            else:
                flat = (
                    amps
                    * np.conj(ref.beta_comp)
                    * np.exp(2j * np.pi * m * ref.u_hat / cfg.antennas)
                )
            phase = np.angle(flat * np.exp(-1j * ref.rotator_angle * k_hat))
            words = psk_words(phase, j_bits)
            psk_rows[i] = words
            bits_out.append(_bits_from_words(words, j_bits))
    bits = np.concatenate(bits_out) if bits_out else np.zeros(0, dtype=int)
    return DemodResult(
        bits=bits,
        comb_words=comb_words,
        psk_word_rows=psk_rows,
        erasures=erasures,
        k_rows=k_rows,
    )
