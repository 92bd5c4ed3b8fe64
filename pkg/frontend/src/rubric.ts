import { RubricAnswer, RubricPath } from "./types.js";

export interface RubricStep {
  key: keyof RubricPath;
  prompt: string;
}

/** The four ordered rubric questions walked for every ticket. */
export const RUBRIC_STEPS: readonly RubricStep[] = [
  {
    key: "artifact_evidence",
    prompt: "Is there specific evidence of a development artifact (code, module, API, config)?",
  },
  {
    key: "improvement_or_defect",
    prompt: "Does the discussion concern a system improvement or a defect?",
  },
  {
    key: "design_limitation",
    prompt: "Is a design limitation or suboptimal implementation choice described?",
  },
  {
    key: "side_effects_or_extra_work",
    prompt: "Are unintended side effects or extra future work mentioned?",
  },
] as const;

export const CONFIDENCE_STEP = 0.05;

/** Snap a confidence value to the 0.05 grid and clamp it into [0, 1]. */
export function snapConfidence(value: number): number {
  if (!Number.isFinite(value)) return 0.5;
  const clamped = Math.min(1, Math.max(0, value));
  return Math.round(clamped / CONFIDENCE_STEP) * CONFIDENCE_STEP;
}

/**
 * State of one rubric walk: answers are advisory and never bind the numeric
 * label; skipped steps are recorded as "unsure". Confidence is always
 * submitted.
 */
export class RubricWalk {
  private answers: Partial<Record<keyof RubricPath, RubricAnswer>> = {};
  private step = 0;
  confidence = 0.5;

  get currentStep(): RubricStep | null {
    return this.step < RUBRIC_STEPS.length ? RUBRIC_STEPS[this.step] : null;
  }

  get stepIndex(): number {
    return this.step;
  }

  get complete(): boolean {
    return this.step >= RUBRIC_STEPS.length;
  }

  answer(value: RubricAnswer): void {
    const cur = this.currentStep;
    if (cur === null) return;
    this.answers[cur.key] = value;
    this.step += 1;
  }

  /** Skipping a step records it as "unsure". */
  skip(): void {
    this.answer("unsure");
  }

  back(): void {
    if (this.step > 0) this.step -= 1;
  }

  setConfidence(value: number): void {
    this.confidence = snapConfidence(value);
  }

  /** Direct numeric entry keeps exact values inside [0, 1] unsnapped. */
  setConfidenceExact(value: number): void {
    if (!Number.isFinite(value)) return;
    this.confidence = Math.min(1, Math.max(0, value));
  }

  toRubricPath(): RubricPath {
    return {
      artifact_evidence: this.answers.artifact_evidence ?? "unsure",
      improvement_or_defect: this.answers.improvement_or_defect ?? "unsure",
      design_limitation: this.answers.design_limitation ?? "unsure",
      side_effects_or_extra_work: this.answers.side_effects_or_extra_work ?? "unsure",
    };
  }

  reset(): void {
    this.answers = {};
    this.step = 0;
    this.confidence = 0.5;
  }
}
