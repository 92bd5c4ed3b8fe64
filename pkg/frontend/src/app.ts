import { HttpApiClient } from "./api.js";
import { cumulativeSvg, histogramSvg } from "./charts.js";
import { segmentText } from "./highlight.js";
import { CONFIDENCE_STEP, RUBRIC_STEPS } from "./rubric.js";
import { LabelingSession } from "./session.js";
import { RubricAnswer } from "./types.js";

const session = new LabelingSession(new HttpApiClient(), "ui");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setText(id: string, text: string): void {
  el(id).textContent = text;
}

function renderTicket(): void {
  const box = el("ticket");
  box.innerHTML = "";
  const t = session.ticket;
  if (!t) {
    box.innerHTML = '<p class="empty">Queue is empty — nothing left to label.</p>';
    return;
  }
  const title = document.createElement("h2");
  title.textContent = `${t.id}: ${t.title}`;
  box.appendChild(title);

  const meta = document.createElement("p");
  meta.className = "meta";
  meta.textContent =
    `${t.issue_type} · priority ${t.priority} · ${t.status} · ` +
    `${t.author_email}${t.author_is_project_member ? " (member)" : ""} · opened ${t.opened_at}`;
  box.appendChild(meta);

  const text = document.createElement("div");
  text.className = "free-text";
  for (const seg of segmentText(t.free_text, t.highlights)) {
    if (seg.highlighted) {
      const mark = document.createElement("mark");
      mark.textContent = seg.text;
      mark.title = seg.phrases.join(", ");
      text.appendChild(mark);
    } else {
      text.appendChild(document.createTextNode(seg.text));
    }
  }
  box.appendChild(text);

  const thread = document.createElement("div");
  thread.className = "comments";
  for (const c of t.comments) {
    const item = document.createElement("div");
    item.className = "comment";
    const head = document.createElement("div");
    head.className = "comment-head";
    head.textContent = `${c.author} · ${c.posted_at}`;
    const body = document.createElement("p");
    body.textContent = c.text;
    item.append(head, body);
    thread.appendChild(item);
  }
  box.appendChild(thread);
}

function renderRubric(): void {
  const box = el("rubric");
  box.innerHTML = "";
  const step = session.walk.currentStep;
  const progress = document.createElement("p");
  progress.className = "meta";
  progress.textContent = step
    ? `Step ${session.walk.stepIndex + 1} of ${RUBRIC_STEPS.length}`
    : "Rubric complete — set your confidence and submit.";
  box.appendChild(progress);

  if (step) {
    const prompt = document.createElement("p");
    prompt.className = "prompt";
    prompt.textContent = step.prompt;
    box.appendChild(prompt);
    for (const value of ["yes", "no", "unsure"] as RubricAnswer[]) {
      const btn = document.createElement("button");
      btn.textContent = value;
      btn.addEventListener("click", () => {
        session.walk.answer(value);
        renderRubric();
      });
      box.appendChild(btn);
    }
  }
  if (session.walk.stepIndex > 0) {
    const back = document.createElement("button");
    back.textContent = "back";
    back.className = "secondary";
    back.addEventListener("click", () => {
      session.walk.back();
      renderRubric();
    });
    box.appendChild(back);
  }
}

function renderStats(): void {
  const stats = session.stats;
  const dash = el("dashboard");
  if (!stats || stats.n_labels === 0) {
    dash.innerHTML = '<p class="empty">No labels yet.</p>';
    return;
  }
  dash.innerHTML =
    `<p class="meta">${stats.n_labels} labels · model v${stats.model_version}</p>` +
    histogramSvg(stats) +
    cumulativeSvg(stats);
}

function renderStatus(): void {
  const pending = session.retryQueue.pending;
  setText(
    "status",
    [
      session.queue.uniform_fallback ? "uniform queue (no model yet)" : "model-weighted queue",
      `retrain: ${session.retrainState}`,
      pending > 0 ? `${pending} label(s) queued for retry` : "",
      session.lastError ?? "",
    ]
      .filter(Boolean)
      .join(" · "),
  );
}

function renderAll(): void {
  renderTicket();
  renderRubric();
  renderStats();
  renderStatus();
}

async function submit(): Promise<void> {
  const slider = el<HTMLInputElement>("confidence");
  session.walk.setConfidenceExact(Number(el<HTMLInputElement>("confidence-exact").value));
  await session.submitLabel();
  slider.value = "0.5";
  el<HTMLInputElement>("confidence-exact").value = "0.5";
  renderAll();
}

function wire(): void {
  const slider = el<HTMLInputElement>("confidence");
  const exact = el<HTMLInputElement>("confidence-exact");
  slider.step = String(CONFIDENCE_STEP);
  slider.addEventListener("input", () => {
    session.walk.setConfidence(Number(slider.value));
    exact.value = String(session.walk.confidence);
  });
  exact.addEventListener("change", () => {
    session.walk.setConfidenceExact(Number(exact.value));
    slider.value = String(session.walk.confidence);
  });

  el("submit").addEventListener("click", () => void submit());
  el("retrain").addEventListener("click", () => {
    void session.retrain().then(renderAll);
    renderStatus();
  });
  el("refresh").addEventListener("click", () => {
    void session.refreshQueue().then(renderAll);
  });

  // Ctrl/Cmd+Enter submits and advances.
  document.addEventListener("keydown", (e) => {
    if (e.key === "Enter" && (e.ctrlKey || e.metaKey)) {
      e.preventDefault();
      void submit();
    }
  });
}

async function main(): Promise<void> {
  wire();
  try {
    await session.refreshQueue();
    await session.refreshStats();
  } catch (err) {
    setText("status", `fetch failed — is the service running? (${String(err)})`);
    const banner = el("retry-banner");
    banner.hidden = false;
    banner.addEventListener("click", () => void main(), { once: true });
    return;
  }
  renderAll();
}

void main();
