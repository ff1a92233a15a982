/** Incremental ND-JSON reader: parses rows as bytes arrive, one batch per
 * chunk, so rendering can start long before the stream ends. */

export interface NdjsonStats {
  rows: number;
  badLines: number;
}

export async function streamNdjson<T>(
  stream: ReadableStream<Uint8Array>,
  onBatch: (rows: T[]) => void,
): Promise<NdjsonStats> {
  const reader = stream.getReader();
  const decoder = new TextDecoder("utf-8");
  const stats: NdjsonStats = { rows: 0, badLines: 0 };
  let buffer = "";

  const parseInto = (text: string, batch: T[]) => {
    const line = text.trim();
    if (!line) return;
    try {
      batch.push(JSON.parse(line) as T);
      stats.rows += 1;
    } catch {
      stats.badLines += 1;
    }
  };

  for (;;) {
    const { done, value } = await reader.read();
    if (done) break;
    buffer += decoder.decode(value, { stream: true });
    const lines = buffer.split("\n");
    buffer = lines.pop() ?? "";
    const batch: T[] = [];
    for (const line of lines) parseInto(line, batch);
    if (batch.length > 0) onBatch(batch);
  }
  buffer += decoder.decode();
  if (buffer.trim()) {
    const batch: T[] = [];
    parseInto(buffer, batch);
    if (batch.length > 0) onBatch(batch);
  }
  return stats;
}
