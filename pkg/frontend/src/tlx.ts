/**
 * NASA-TLX form model: six 0-100 sliders (step 5) and the 15 pairwise
 * comparisons that weight them. Weights are the win counts per factor, so
 * they always sum to 15; submission stays blocked until every pair is
 * answered. The pair order is canonical and shared with the service.
 */

export const TLX_FACTORS = ["MD", "PD", "TD", "PE", "EF", "FR"] as const;
export type TlxFactor = (typeof TLX_FACTORS)[number];

export const TLX_FACTOR_LABELS: Record<TlxFactor, string> = {
  MD: "Mental demand",
  PD: "Physical demand",
  TD: "Temporal demand",
  PE: "Performance",
  EF: "Effort",
  FR: "Frustration",
};

export const TLX_PAIRS: ReadonlyArray<readonly [TlxFactor, TlxFactor]> = (() => {
  const pairs: Array<readonly [TlxFactor, TlxFactor]> = [];
  for (let i = 0; i < TLX_FACTORS.length; i++) {
    for (let j = i + 1; j < TLX_FACTORS.length; j++) {
      pairs.push([TLX_FACTORS[i], TLX_FACTORS[j]] as const);
    }
  }
  return pairs;
})();

export class TlxFormState {
  ratings: Record<TlxFactor, number>;
  choices: Array<TlxFactor | null>;

  constructor() {
    this.ratings = { MD: 50, PD: 50, TD: 50, PE: 50, EF: 50, FR: 50 };
    this.choices = new Array(TLX_PAIRS.length).fill(null);
  }

  setRating(factor: TlxFactor, value: number): void {
    if (value < 0 || value > 100 || value % 5 !== 0) {
      throw new Error(`rating must be 0..100 in steps of 5, got ${value}`);
    }
    this.ratings[factor] = value;
  }

  choose(pairIndex: number, factor: TlxFactor): void {
    const pair = TLX_PAIRS[pairIndex];
    if (!pair) throw new Error(`no pair ${pairIndex}`);
    if (!pair.includes(factor)) {
      throw new Error(`${factor} is not a member of pair ${pair.join("/")}`);
    }
    this.choices[pairIndex] = factor;
  }

  answeredCount(): number {
    return this.choices.filter((c) => c !== null).length;
  }

  complete(): boolean {
    return this.answeredCount() === TLX_PAIRS.length;
  }

  /** Win counts per factor; only valid on a complete form. Sums to 15. */
  weights(): number[] {
    if (!this.complete()) {
      throw new Error(
        `submission blocked: ${this.answeredCount()}/${TLX_PAIRS.length} pairs answered`,
      );
    }
    const wins: Record<TlxFactor, number> = { MD: 0, PD: 0, TD: 0, PE: 0, EF: 0, FR: 0 };
    for (const choice of this.choices) {
      wins[choice as TlxFactor] += 1;
    }
    return TLX_FACTORS.map((f) => wins[f]);
  }

  /** Payload for the tlx_submit frame; service derives identical weights. */
  submitPayload(): { ratings: number[]; pairs: string[] } {
    if (!this.complete()) {
      throw new Error("submission blocked: unanswered pairs remain");
    }
    return {
      ratings: TLX_FACTORS.map((f) => this.ratings[f]),
      pairs: this.choices.map((c) => c as string),
    };
  }
}

/** Weighted total as the service computes it: sum(rating*weight)/15. */
export function tlxTotal(ratings: number[], weights: number[]): number {
  let sum = 0;
  for (let i = 0; i < 6; i++) sum += ratings[i] * weights[i];
  return sum / 15;
}
