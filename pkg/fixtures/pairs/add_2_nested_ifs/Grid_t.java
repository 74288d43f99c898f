public class Grid {
    private int[][] cells;

    public void mark(int row, int col, int v) {
        int count = 0;
        if (row < cells.length) {
            if (col < cells[row].length) {
                count = count + 1;
            }
        }
        cells[row][col] = v;
    }
}
