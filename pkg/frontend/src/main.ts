// DOM wiring for the operator console. All decision-support logic lives
// in session.ts / threshold.ts / api.ts; this file only moves pixels and
// events around.

import { ApiClient, costTextFromRaw, type RankedEntry } from './api';
import {
  beginConfirm,
  canConfirm,
  canQuery,
  confirmFailed,
  confirmSucceeded,
  newSession,
  selectCandidate,
  setImage,
  setMask,
  setQueryResult,
  type SessionState,
} from './session';
import { binarize, maskToRgba, objectPixelCount, type GrayImage } from './threshold';
import { drawSilhouette } from './silhouette';

const api = new ApiClient('');
let session: SessionState = newSession();
let sourceImage: GrayImage | null = null;

const el = {
  file: document.getElementById('file') as HTMLInputElement,
  level: document.getElementById('level') as HTMLInputElement,
  levelValue: document.getElementById('level-value') as HTMLSpanElement,
  invert: document.getElementById('invert') as HTMLInputElement,
  preview: document.getElementById('preview') as HTMLCanvasElement,
  pixels: document.getElementById('pixels') as HTMLSpanElement,
  queryBtn: document.getElementById('query') as HTMLButtonElement,
  topK: document.getElementById('top-k') as HTMLInputElement,
  banner: document.getElementById('banner') as HTMLDivElement,
  target: document.getElementById('target') as HTMLCanvasElement,
  targetBox: document.getElementById('target-box') as HTMLDivElement,
  gallery: document.getElementById('gallery') as HTMLDivElement,
  note: document.getElementById('note') as HTMLInputElement,
  confirmBtn: document.getElementById('confirm') as HTMLButtonElement,
  decisionState: document.getElementById('decision-state') as HTMLSpanElement,
  health: document.getElementById('health') as HTMLSpanElement,
};

function banner(message: string, kind: 'error' | 'ok' | '' = 'error'): void {
  el.banner.textContent = message;
  el.banner.className = kind;
}

function refreshControls(): void {
  el.queryBtn.disabled = !canQuery(session);
  el.confirmBtn.disabled = !canConfirm(session);
  el.decisionState.textContent = session.decisionStatus === 'none' ? '' : session.decisionStatus;
  const locked = session.decisionStatus === 'confirmed';
  el.file.disabled = locked;
  el.level.disabled = locked || !session.imageLoaded;
  el.invert.disabled = locked || !session.imageLoaded;
  el.note.disabled = locked;
}

async function loadFile(file: File): Promise<void> {
  const url = URL.createObjectURL(file);
  try {
    const img = new Image();
    await new Promise<void>((resolve, reject) => {
      img.onload = () => resolve();
      img.onerror = () => reject(new Error('unreadable image'));
      img.src = url;
    });
    const canvas = document.createElement('canvas');
    canvas.width = img.naturalWidth;
    canvas.height = img.naturalHeight;
    const ctx = canvas.getContext('2d')!;
    ctx.drawImage(img, 0, 0);
    const data = ctx.getImageData(0, 0, canvas.width, canvas.height);
    sourceImage = { width: data.width, height: data.height, data: data.data };
    session = setImage(session);
    banner('', '');
    updatePreview();
  } catch (err) {
    banner(`could not load image: ${(err as Error).message}`);
  } finally {
    URL.revokeObjectURL(url);
  }
}

function updatePreview(): void {
  if (!sourceImage) return;
  const mask = binarize(sourceImage, {
    level: Number(el.level.value),
    invert: el.invert.checked,
  });
  const pixels = objectPixelCount(mask);
  session = setMask(session, mask, pixels);
  el.levelValue.textContent = el.level.value;
  el.pixels.textContent = `${pixels} object px`;

  el.preview.width = mask.width;
  el.preview.height = mask.height;
  const ctx = el.preview.getContext('2d')!;
  ctx.putImageData(new ImageData(maskToRgba(mask), mask.width, mask.height), 0, 0);

  el.gallery.innerHTML = '';
  el.targetBox.hidden = true;
  refreshControls();
}

function maskBlob(): Promise<Blob> {
  // the uploaded mask is exactly the previewed one
  return new Promise((resolve, reject) => {
    el.preview.toBlob((b) => (b ? resolve(b) : reject(new Error('mask encoding failed'))), 'image/png');
  });
}

async function runQuery(): Promise<void> {
  if (!canQuery(session)) return;
  el.queryBtn.disabled = true;
  banner('querying…', 'ok');
  try {
    const blob = await maskBlob();
    const { doc, rawText } = await api.query(blob, Number(el.topK.value) || 6);
    session = setQueryResult(session, doc, rawText);
    banner('', '');
    renderTarget();
    await renderGallery(doc.entries, rawText);
  } catch (err) {
    banner(`query failed: ${(err as Error).message} — adjust and retry`);
  } finally {
    refreshControls();
  }
}

function renderTarget(): void {
  el.targetBox.hidden = false;
  const ctx = el.target.getContext('2d')!;
  ctx.clearRect(0, 0, el.target.width, el.target.height);
  ctx.drawImage(el.preview, 0, 0, el.target.width, el.target.height);
}

async function renderGallery(entries: RankedEntry[], rawText: string): Promise<void> {
  el.gallery.innerHTML = '';
  for (const entry of entries) {
    const card = document.createElement('div');
    card.className = 'card';
    card.dataset.modelId = entry.id;

    const canvas = document.createElement('canvas');
    canvas.width = 280;
    canvas.height = 110;
    card.appendChild(canvas);

    const label = document.createElement('div');
    label.className = 'label';
    const cost = costTextFromRaw(rawText, entry);
    label.innerHTML =
      `<b>#${entry.rank} ${entry.display_name}</b> <i>${entry.class_name}</i>` +
      `<br>cost <span class="cost">${cost}</span>${entry.mirrored ? ' (mirrored)' : ''}`;
    card.appendChild(label);

    card.addEventListener('click', () => {
      session = selectCandidate(session, entry.id);
      for (const other of el.gallery.children) other.classList.remove('selected');
      if (session.selectedId === entry.id) card.classList.add('selected');
      refreshControls();
    });
    el.gallery.appendChild(card);

    try {
      const info = await api.model(entry.id);
      const ctx = canvas.getContext('2d')!;
      ctx.strokeStyle = '#123';
      ctx.lineWidth = 1.2;
      drawSilhouette(ctx, info.silhouette, canvas.width, canvas.height);
    } catch {
      canvas.replaceWith(document.createTextNode('(silhouette unavailable)'));
    }
  }
}

async function confirmDecision(): Promise<void> {
  const query = session.query;
  if (!canConfirm(session) || !query) return;
  session = beginConfirm(session);
  refreshControls();
  try {
    await api.decide(query.query_sha256, session.selectedId!, el.note.value, session.decisionKey!);
    session = confirmSucceeded(session);
    banner(`identification confirmed: ${session.selectedId}`, 'ok');
  } catch (err) {
    session = confirmFailed(session);
    banner(`decision not recorded: ${(err as Error).message} — press confirm to retry`);
  }
  refreshControls();
}

el.file.addEventListener('change', () => {
  const f = el.file.files?.[0];
  if (f) void loadFile(f);
});
el.level.addEventListener('input', updatePreview);
el.invert.addEventListener('change', updatePreview);
el.queryBtn.addEventListener('click', () => void runQuery());
el.confirmBtn.addEventListener('click', () => void confirmDecision());

void api
  .health()
  .then((h) => {
    el.health.textContent = `service: ${h.status}, ${h.models} models`;
  })
  .catch(() => {
    el.health.textContent = 'service: unreachable';
  });

refreshControls();
