"""Pure-Python kernels; the compiled ``_ckernels`` module mirrors these exactly.

Interval conventions shared by both implementations: the coder keeps an
inclusive ``[low, high]`` pair of beta-bit integers (so ``high = 2**beta - 1``
stands for an exclusive upper end of 1). Renormalization shifts out a
bit whenever both ends agree on the leading bit, and expands around the
midpoint when the interval straddles it inside the middle half, counting the
pending opposite bits in ``follow``.
"""

import numpy as np

OK = 0
PADDING_EXHAUSTED = 1
PRECISION_COLLAPSE = 2


def embed_symbols(cum, bits, beta, gamma):
    """Arithmetic-decode ``bits`` into one symbol index per row of ``cum``.

    Returns ``(symbols, consumed, status)``; ``consumed`` counts the bits
    shifted into the beta-bit window after the initial fill.
    """
    n = cum.shape[0]
    k = cum.shape[1] - 1
    cum = cum.tolist()
    bits = bits.tolist()
    nbits = len(bits)
    sym = np.zeros(n, dtype=np.int32)
    if n == 0:
        return sym, 0, OK
    if nbits < beta:
        return sym, 0, PADDING_EXHAUSTED
    half = 1 << (beta - 1)
    q1 = half >> 1
    q3 = half + q1
    low = 0
    high = (1 << beta) - 1
    q = 0
    for i in range(beta):
        q = (q << 1) | bits[i]
    pos = beta
    for i in range(n):
        row = cum[i]
        width = high - low + 1
        s = 0
        top = 0
        while s < k:
            if row[s + 1] != row[s]:
                top = low + ((width * row[s + 1]) >> gamma)
                if q < top:
                    break
            s += 1
        bot = low + ((width * row[s]) >> gamma)
        low = bot
        high = top - 1
        if high < low:
            return sym, pos - beta, PRECISION_COLLAPSE
        sym[i] = s
        while True:
            if high < half:
                off = 0
            elif low >= half:
                off = half
            elif low >= q1 and high < q3:
                off = q1
            else:
                break
            if pos >= nbits:
                return sym, pos - beta, PADDING_EXHAUSTED
            low = (low - off) << 1
            high = ((high - off) << 1) | 1
            q = ((q - off) << 1) | bits[pos]
            pos += 1
    return sym, pos - beta, OK


def extract_bits(cum, symbols, beta, gamma, limit):
    """Arithmetic-encode ``symbols`` and return the bits it pins down.

    Stops once ``limit`` bits are emitted; with ``limit < 0`` runs to the end
    and only counts. Returns ``(bits, count, status)``.
    """
    n = cum.shape[0]
    cum = cum.tolist()
    symbols = symbols.tolist()
    store = limit >= 0
    out = []
    half = 1 << (beta - 1)
    q1 = half >> 1
    q3 = half + q1
    low = 0
    high = (1 << beta) - 1
    follow = 0
    count = 0
    for i in range(n):
        row = cum[i]
        s = symbols[i]
        width = high - low + 1
        bot = low + ((width * row[s]) >> gamma)
        high = low + ((width * row[s + 1]) >> gamma) - 1
        low = bot
        if high < low:
            return np.array(out, dtype=np.uint8), count, PRECISION_COLLAPSE
        while True:
            if high < half:
                off = 0
                bit = 0
            elif low >= half:
                off = half
                bit = 1
            elif low >= q1 and high < q3:
                follow += 1
                low = (low - q1) << 1
                high = ((high - q1) << 1) | 1
                continue
            else:
                break
            if store:
                out.append(bit)
                out.extend([1 - bit] * follow)
            count += 1 + follow
            follow = 0
            low = (low - off) << 1
            high = ((high - off) << 1) | 1
        if store and count >= limit:
            break
    if store:
        return np.array(out[:limit], dtype=np.uint8), min(count, limit), OK
    return np.zeros(0, dtype=np.uint8), count, OK


def stc_viterbi(x, rho, colmask, block_end, msg, h):
    """Minimum-cost ``y`` with ``H y = msg`` over a banded syndrome trellis.

    ``colmask[i]`` is column i of H restricted to the h rows starting at the
    current block's row; ``block_end[i]`` marks the last column of a block.
    Returns ``(y, cost)``; cost is ``inf`` when no coset member exists.
    """
    n = x.shape[0]
    nstates = 1 << h
    states = np.arange(nstates)
    w = np.full(nstates, np.inf)
    w[0] = 0.0
    path = np.zeros((n, nstates), dtype=bool)
    b = 0
    for i in range(n):
        c = int(colmask[i])
        if x[i]:
            c0, c1 = rho[i], 0.0
        else:
            c0, c1 = 0.0, rho[i]
        stay = w + c0
        flip = w[states ^ c] + c1
        take = flip < stay
        path[i] = take
        w = np.where(take, flip, stay)
        if block_end[i]:
            nw = np.full(nstates, np.inf)
            nw[: nstates >> 1] = w[(states[: nstates >> 1] << 1) | int(msg[b])]
            w = nw
            b += 1
    cost = float(w[0])
    y = np.zeros(n, dtype=np.uint8)
    if not np.isfinite(cost):
        return y, cost
    s = 0
    for i in range(n - 1, -1, -1):
        if block_end[i]:
            b -= 1
            s = (s << 1) | int(msg[b])
        if path[i, s]:
            y[i] = 1
            s ^= int(colmask[i])
    return y, cost
