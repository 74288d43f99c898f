public class Cache {
    private Object last;

    public Object lookup(Object key) {
        if (key == null) {
            return last;
        }
        last = key;
        return key;
    }
}
